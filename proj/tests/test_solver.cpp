#include "lowrank/errors.hpp"
#include "lowrank/io.hpp"
#include "lowrank/sampling.hpp"
#include "lowrank/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace lowrank;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d)
    v(i++) = x;
  return v.asDiagonal();
}

SolverParams params_for(Index r, double delta) {
  SolverParams p;
  p.rank_bound = r;
  p.delta = delta;
  p.stop_tol = 1e-8;
  p.max_iters = 500;
  return p;
}

} // namespace

TEST_CASE("parameter validation") {
  LineSearchParams ls;
  CHECK_NOTHROW(ls.validate());
  ls.alpha_lo = 2.0;
  CHECK_THROWS_AS(ls.validate(), ArgumentError);
  ls = {};
  ls.beta = 1.0;
  CHECK_THROWS_AS(ls.validate(), ArgumentError);
  ls = {};
  ls.c = 0.0;
  CHECK_THROWS_AS(ls.validate(), ArgumentError);
  ls = {};
  ls.initial_alpha = 2.0;
  CHECK_THROWS_AS(ls.validate(), ArgumentError);

  SolverParams p;
  p.delta = 0.0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
}

TEST_CASE("p2gd_step from zero on a feasible quadratic target") {
  // f = 1/2 ||X - M||^2, M = diag(1, 1, 0), r = 2: G = M and the full step
  // lands on M with f = 0 <= f(0) - 0.1 * 1 * ||M||^2 = 0.8.
  const Matrix m = diag({1, 1, 0});
  const LowRankApproxProblem f(m);
  LineSearchParams ls;
  ls.c = 0.1;
  const auto step = p2gd_step(f, VarietyPoint(3, 3, 2), ls);
  CHECK(step.accepted_alpha == 1.0);
  CHECK(step.backtrack_count == 0);
  CHECK(step.f_before == doctest::Approx(1.0));
  CHECK(step.s_before == doctest::Approx(std::sqrt(2.0)));
  CHECK(step.f_after <= 1e-28);
  CHECK((step.next_point.matrix() - m).norm() <= 1e-14);
}

TEST_CASE("p2gd_step refuses stationary points") {
  const Matrix m = diag({1, 1, 0});
  const LowRankApproxProblem f(m);
  CHECK_THROWS_AS(
      p2gd_step(f, VarietyPoint::from_matrix(m, 2), LineSearchParams{}),
      ArgumentError);
}

TEST_CASE("p2gd_step backtracks and honors the Armijo certificate") {
  // Curvature 10 means the unit step overshoots.
  const Matrix a = random_gaussian(5, 4, 3);
  const LowRankApproxProblem base(a);
  class Scaled final : public CostFunction {
  public:
    explicit Scaled(const Matrix &a) : CostFunction(a.rows(), a.cols()), a_(a) {}
    double eval(const Matrix &x) const override {
      return 5.0 * (x - a_).squaredNorm();
    }
    Matrix gradient(const Matrix &x) const override { return 10.0 * (x - a_); }

  private:
    Matrix a_;
  } f(a);
  LineSearchParams ls;
  const auto step = p2gd_step(f, VarietyPoint(5, 4, 2), ls);
  CHECK(step.backtrack_count > 0);
  CHECK(step.accepted_alpha == doctest::Approx(std::pow(ls.beta,
                                                        step.backtrack_count)));
  CHECK(step.f_after <= step.f_before - ls.c * step.accepted_alpha *
                                            step.s_before * step.s_before);
  CHECK(step.next_point.rank() <= 2);
}

TEST_CASE("a wrong gradient surfaces as a line-search failure") {
  class Wrong final : public CostFunction {
  public:
    Wrong() : CostFunction(3, 3) {}
    double eval(const Matrix &x) const override { return x.squaredNorm(); }
    Matrix gradient(const Matrix &x) const override {
      return -x - Matrix::Ones(3, 3);
    }
  } f;
  LineSearchParams ls;
  ls.max_backtracks = 10;
  try {
    p2gd_step(f, VarietyPoint(3, 3, 1), ls);
    FAIL("expected LineSearchFailure");
  } catch (const LineSearchFailure &e) {
    CHECK(e.last_alpha == doctest::Approx(std::pow(0.5, 10)));
  }

  SolverParams p = params_for(1, 0.1);
  p.line_search = ls;
  const auto trace = p2gdr(f, Matrix::Zero(3, 3), p);
  CHECK(trace.termination == Termination::LineSearchFailure);
  CHECK(trace.records.empty());
  CHECK(trace.message.find("j = 0") != std::string::npos);
}

TEST_CASE("kappa bound") {
  const Matrix a = random_gaussian(4, 4, 9);
  const LowRankApproxProblem f(a);
  CHECK(kappa_bound(f, VarietyPoint(4, 4, 2), 1.0, 1.0) == 0.5);

  // At a stationary rank-2 point only the first term and L/2 remain.
  const auto svd = compute_svd(a);
  const auto x = VarietyPoint::from_svd(svd, 4, 4, 2);
  const double c = std::sqrt(2.0) / (2.0 * svd.sigma(1));
  CHECK(kappa_bound(f, x, 1.0, 1.0) ==
        doctest::Approx(c * f.gradient(x.matrix()).norm() + 0.5)
            .epsilon(1e-9));

  // Full expression at a generic point.
  Sampler s(5);
  const auto y = s.point(4, 4, 2, 2);
  const auto rep = stationarity_measure(f, y);
  const double cy = std::sqrt(2.0) / (2.0 * y.sigma_min());
  const double expected = cy * rep.gradient_norm +
                          0.5 * 3.0 * std::pow(cy * 2.0 * rep.s_value + 1, 2);
  CHECK(kappa_bound(f, y, 2.0, 3.0) == doctest::Approx(expected));
  CHECK_THROWS_AS(kappa_bound(f, y, 1.0, 0.0), ArgumentError);
}

TEST_CASE("accepted steps respect the kappa floor") {
  Sampler s(31);
  LineSearchParams ls;
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const Index m = s.integer(3, 8), n = s.integer(3, 8);
    const Index r = s.integer(1, std::min<Index>(3, std::min(m, n) - 1));
    const LowRankApproxProblem f(3.0 * s.gaussian(m, n));
    const auto x = s.point(m, n, r, s.integer(0, r), 0.05, 3.0);
    const auto step = p2gd_step(f, x, ls);
    REQUIRE(step.accepted_alpha >=
            step_size_floor(ls, kappa_bound(f, x, ls.alpha_hi, 1.0)));
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("factored projection agrees with the ambient SVD") {
  Sampler s(32);
  for (int k = 0; k < 200; ++k) {
    const Index m = s.integer(2, 9), n = s.integer(2, 9);
    const Index r = s.integer(1, std::min(m, n) - 1);
    const auto x = s.point(m, n, r, s.integer(0, r));
    const auto dir = project_to_tangent_cone(x, s.gaussian(m, n));
    const double alpha = s.uniform(0.0, 2.0);
    const auto ya =
        project_sum_to_variety(x, dir, alpha, ProjectionMethod::Ambient);
    const auto yf =
        project_sum_to_variety(x, dir, alpha, ProjectionMethod::Factored);
    REQUIRE(ya.rank() == yf.rank());
    REQUIRE((ya.matrix() - yf.matrix()).norm() <=
            1e-10 * (1.0 + ya.matrix().norm()));
  }
}

TEST_CASE("search function") {
  SUBCASE("no reduction when delta-rank equals rank") {
    const Matrix a = random_gaussian(5, 5, 1);
    const LowRankApproxProblem f(a);
    const auto x = VarietyPoint::from_matrix(diag({2, 1.5, 0, 0, 0}), 2);
    const auto res = p2gdr_search(f, x, params_for(2, 0.1), 1e-8);
    const auto step = p2gd_step(f, x, LineSearchParams{});
    CHECK(res.record.candidates_evaluated == 1);
    CHECK(res.record.chosen_j == 0);
    CHECK(res.next_f == step.f_after);
    CHECK(res.next_point.matrix() == step.next_point.matrix());
  }
  SUBCASE("small singular values add candidates") {
    const LowRankApproxProblem f(random_gaussian(3, 3, 2));
    const auto x = VarietyPoint::from_matrix(diag({1, 0.05, 0}), 2);
    const auto res = p2gdr_search(f, x, params_for(2, 0.1), 1e-8);
    CHECK(res.record.rank == 2);
    CHECK(res.record.delta_rank == 1);
    CHECK(res.record.candidates_evaluated == 2);
    CHECK(res.next_f < f.eval(x.matrix()));
  }
  SUBCASE("a reduced candidate that is already stationary takes no step") {
    // M = diag(1, 0, 0): the j = 1 candidate diag(1, 0, 0) is the minimizer.
    const LowRankApproxProblem f(diag({1, 0, 0}));
    const auto x = VarietyPoint::from_matrix(diag({1, 0.05, 0}), 2);
    SolverParams p = params_for(2, 0.1);
    p.line_search.alpha_hi = 0.5; // the j = 0 step cannot reach the optimum
    const auto res = p2gdr_search(f, x, p, 1e-8);
    CHECK(res.record.chosen_j == 1);
    CHECK(res.record.accepted_alpha == 0.0);
    CHECK(res.next_f == 0.0);
  }
  SUBCASE("precondition") {
    const Matrix m = diag({1, 1, 0});
    const LowRankApproxProblem f(m);
    CHECK_THROWS_AS(p2gdr_search(f, VarietyPoint::from_matrix(m, 2),
                                 params_for(2, 0.1), 1e-8),
                    ArgumentError);
  }
}

TEST_CASE("p2gdr on low-rank approximation reaches the SVD optimum") {
  const Matrix a = random_gaussian(10, 8, 77);
  const Vector sv = compute_svd(a).sigma;
  const double optimum = 0.5 * sv.tail(5).squaredNorm();
  const LowRankApproxProblem f(a);
  SolverParams p = params_for(3, 0.1 * sv(0));
  const auto trace =
      p2gdr(f, truncate_to_rank(random_gaussian(10, 8, 78), 3).matrix, p);
  CHECK(trace.termination == Termination::Stationary);
  CHECK(std::abs(trace.final_f - optimum) <= 1e-6);
  // Near the optimum consecutive f values tie to the last ulp; descent is
  // strict while the Armijo guarantee is above the rounding level of f.
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const auto &prev = trace.records[i - 1];
    CHECK(trace.records[i].f_value <= prev.f_value);
    if (p.line_search.c * prev.accepted_alpha * prev.s_value * prev.s_value >
        80 * 2.3e-16 * prev.f_value)
      CHECK(trace.records[i].f_value < prev.f_value);
  }
  CHECK(trace.final_f <= trace.records.back().f_value);
}

TEST_CASE("p2gdr from a stationary start does nothing") {
  const Matrix m = diag({2, 1, 0});
  const LowRankApproxProblem f(m);
  const auto trace = p2gdr(f, m, params_for(2, 0.1));
  CHECK(trace.termination == Termination::Stationary);
  CHECK(trace.records.empty());
  CHECK(io::trace_to_csv(trace) == std::string(io::kTraceHeader) + "\n");
}

TEST_CASE("p2gdr input validation") {
  const LowRankApproxProblem f(random_gaussian(4, 4, 1));
  CHECK_THROWS_AS(p2gdr(f, Matrix::Identity(4, 4), params_for(2, 0.1)),
                  InfeasiblePointError);
  CHECK_THROWS_AS(p2gdr(f, Matrix::Zero(3, 4), params_for(2, 0.1)),
                  ArgumentError);
}

TEST_CASE("max_iters termination and default stop tolerance") {
  const Matrix a = random_gaussian(8, 8, 4);
  const Matrix mask = (random_gaussian(8, 8, 5).array() > 0).cast<double>();
  const MatrixCompletionProblem f(a, mask);
  SolverParams p = params_for(2, 0.1);
  p.stop_tol.reset();
  p.max_iters = 3;
  const auto trace = p2gdr(f, Matrix::Zero(8, 8), p);
  CHECK(trace.termination == Termination::MaxIters);
  CHECK(trace.records.size() == 3);
  CHECK(trace.stop_tol == doctest::Approx(default_stop_tol(f, Matrix::Zero(8, 8))));
}

TEST_CASE("plain P2GD matches P2GDR when no rank reduction is triggered") {
  const Matrix a = random_gaussian(7, 6, 12);
  const LowRankApproxProblem f(a);
  const auto p = params_for(2, 1e-6);
  const Matrix x0 = truncate_to_rank(random_gaussian(7, 6, 13), 2).matrix;
  const auto t1 = p2gdr(f, x0, p);
  const auto t2 = p2gd_plain(f, x0, p);
  for (const auto &rec : t1.records)
    REQUIRE(rec.delta_rank == rec.rank);
  CHECK(io::trace_to_csv(t1) == io::trace_to_csv(t2));
  CHECK(t1.final_point.matrix() == t2.final_point.matrix());
}

TEST_CASE("solver is deterministic and strictly descending") {
  Sampler s(40);
  for (int k = 0; k < 5; ++k) {
    const Matrix a = s.gaussian(8, 7);
    const Matrix mask = (s.gaussian(8, 7).array() > -0.2).cast<double>();
    const MatrixCompletionProblem f(a, mask);
    SolverParams p = params_for(3, 0.5);
    p.max_iters = 100;
    const auto t1 = p2gdr(f, Matrix::Zero(8, 7), p);
    const auto t2 = p2gdr(f, Matrix::Zero(8, 7), p);
    REQUIRE(io::trace_to_csv(t1) == io::trace_to_csv(t2));
    for (std::size_t i = 0; i < t1.records.size(); ++i) {
      const auto &rec = t1.records[i];
      const double next = i + 1 < t1.records.size()
                              ? t1.records[i + 1].f_value
                              : t1.final_f;
      REQUIRE(next < rec.f_value);
      REQUIRE(rec.rank <= 3);
      REQUIRE(rec.chosen_j <= rec.rank - rec.delta_rank);
    }
  }
}

TEST_CASE("factored projection gives the same solve") {
  const Matrix a = random_gaussian(9, 7, 50);
  const LowRankApproxProblem f(a);
  SolverParams p = params_for(3, 0.2);
  const Matrix x0 = truncate_to_rank(random_gaussian(9, 7, 51), 3).matrix;
  const auto ambient = p2gdr(f, x0, p);
  p.projection = ProjectionMethod::Factored;
  const auto factored = p2gdr(f, x0, p);
  CHECK(ambient.termination == factored.termination);
  CHECK(std::abs(ambient.final_f - factored.final_f) <= 1e-10);
}
