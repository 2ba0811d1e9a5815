#include "lowrank/properties.hpp"

#include "lowrank/errors.hpp"
#include "lowrank/io.hpp"
#include "lowrank/sampling.hpp"
#include "lowrank/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace lowrank {

namespace {

struct Tally {
  int trials = 0;
  int failures = 0;
  double worst = 0.0;

  void record(bool ok, double err = 0.0) {
    ++trials;
    if (!ok)
      ++failures;
    worst = std::max(worst, err);
  }
  PropertyResult result(std::string name) const {
    std::ostringstream ss;
    ss << trials - failures << "/" << trials << " ok, worst " << worst;
    return {std::move(name), failures == 0 && trials > 0, ss.str()};
  }
};

struct Shape {
  Index m, n, r, rank;
};

Shape random_shape(Sampler &s, Index max_dim = 9, Index max_r = 4) {
  const Index m = s.integer(2, max_dim);
  const Index n = s.integer(2, max_dim);
  const Index r = s.integer(1, std::min<Index>(max_r, std::min(m, n) - 1));
  return {m, n, r, s.integer(0, r)};
}

PropertyResult svd_reconstruction(Sampler &s) {
  Tally t;
  for (int k = 0; k < 50; ++k) {
    const Matrix x = s.gaussian(s.integer(1, 12), s.integer(1, 12));
    const auto svd = compute_svd(x);
    const double err = (svd.reconstruct() - x).norm() / x.norm();
    const Index k_min = std::min(x.rows(), x.cols());
    const double ortho =
        std::max((svd.u.transpose() * svd.u - Matrix::Identity(k_min, k_min))
                     .norm(),
                 (svd.v.transpose() * svd.v - Matrix::Identity(k_min, k_min))
                     .norm());
    bool sorted = true;
    for (Index j = 1; j < svd.sigma.size(); ++j)
      sorted = sorted && svd.sigma(j) <= svd.sigma(j - 1);
    t.record(err <= 1e-12 && ortho <= 1e-12 && sorted, std::max(err, ortho));
  }
  return t.result("linalg: SVD reconstruction and orthonormality");
}

PropertyResult singular_value_lipschitz(Sampler &s) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    const Index m = s.integer(1, 10), n = s.integer(1, 10);
    const Matrix x = s.gaussian(m, n);
    const Matrix y = x + s.uniform(0.0, 1.0) * s.gaussian(m, n);
    const Vector sx = compute_svd(x).sigma, sy = compute_svd(y).sigma;
    const double bound = (x - y).norm();
    const double gap = (sx - sy).cwiseAbs().maxCoeff();
    t.record(gap <= bound + 1e-10, gap - bound);
  }
  return t.result("linalg: singular values are 1-Lipschitz");
}

PropertyResult truncation_norm_identity(Sampler &s) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    const Index m = s.integer(1, 12), n = s.integer(1, 12);
    const Matrix x = s.gaussian(m, n);
    const Index target = s.integer(0, std::min(m, n));
    const auto tr = truncate_to_rank(x, target);
    const double lhs = tr.matrix.squaredNorm() + tr.distance * tr.distance;
    const double rel = std::abs(lhs - x.squaredNorm()) / x.squaredNorm();
    const double dist_err =
        std::abs((x - tr.matrix).norm() - tr.distance) / (1.0 + x.norm());
    t.record(rel <= 1e-9 && dist_err <= 1e-10, std::max(rel, dist_err));
  }
  return t.result("linalg: ||P(X)||^2 + d(X)^2 = ||X||^2");
}

PropertyResult delta_rank_monotone(Sampler &s) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    const Matrix x = s.gaussian(s.integer(1, 8), s.integer(1, 8));
    const double d1 = s.uniform(1e-3, 3.0), d2 = s.uniform(1e-3, 3.0);
    const auto svd = compute_svd(x);
    const Index r1 = delta_rank(svd, std::min(d1, d2));
    const Index r2 = delta_rank(svd, std::max(d1, d2));
    t.record(r1 >= r2 && r1 <= svd.numerical_rank);
  }
  return t.result("linalg: delta-rank is nonincreasing in delta");
}

PropertyResult local_delta_rank(Sampler &s) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    const Index m = s.integer(2, 9), n = s.integer(2, 9);
    const Index rank = s.integer(1, std::min(m, n));
    const Matrix x = s.orthonormal(m, rank) *
                     Vector::LinSpaced(rank, 3.0, 1.0).asDiagonal() *
                     s.orthonormal(n, rank).transpose();
    const double delta = s.uniform(0.05, 2.0);
    const double eps = s.uniform(0.01, 0.99) * std::min(1.0, delta);
    Matrix e = s.gaussian(m, n);
    const Matrix y = x + s.uniform(0.0, 1.0) * eps * e / e.norm();
    const auto svd = compute_svd(y);
    const Index dr = delta_rank(svd, delta);
    const double near = (truncate_to_rank(svd, rank).matrix - x).norm();
    t.record(dr <= rank && rank <= svd.numerical_rank && near <= 2.0 * eps,
             near / eps);
  }
  return t.result("linalg: local delta-rank and projection radius");
}

PropertyResult projection_optimality(Sampler &s) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    const auto sh = random_shape(s);
    const auto x = s.point(sh.m, sh.n, sh.r, sh.rank);
    const Matrix g = s.gaussian(sh.m, sh.n);
    const auto proj = project_to_tangent_cone(x, g);
    const double best = (g - proj.projected).norm();
    const double other = (g - s.tangent_vector(x)).norm();
    t.record(best <= other + 1e-9, best - other);
  }
  return t.result("variety: tangent projection beats sampled tangents");
}

PropertyResult frame_invariance(Sampler &s) {
  Tally t;
  for (int k = 0; k < 100; ++k) {
    auto sh = random_shape(s);
    sh.rank = std::max<Index>(sh.rank, 1);
    const auto x = s.point(sh.m, sh.n, sh.r, sh.rank);
    const LowRankApproxProblem f(s.gaussian(sh.m, sh.n));
    Matrix u = x.u(), v = x.v();
    for (Index j = 0; j < x.rank(); ++j)
      if (s.uniform(0, 1) < 0.5) {
        u.col(j) *= -1.0;
        v.col(j) *= -1.0;
      }
    const auto flipped = VarietyPoint::from_factors(u, x.sigma(), v, sh.r);
    const double a = stationarity_measure(f, x).s_value;
    const double b = stationarity_measure(f, flipped).s_value;
    const double rel = std::abs(a - b) / std::max(1.0, a);
    t.record(rel <= 1e-9, rel);
  }
  return t.result("variety: s_f independent of the SVD frame");
}

PropertyResult sandwich(Sampler &s) {
  Tally t;
  for (int k = 0; k < 300; ++k) {
    const auto sh = random_shape(s, 12, 4);
    const auto x = s.point(sh.m, sh.n, sh.r, sh.rank);
    const Matrix grad = s.gaussian(sh.m, sh.n);
    const auto report = stationarity_from_projection(
        grad, project_to_tangent_cone(x, -grad));
    const double g2 = report.gradient_norm * report.gradient_norm;
    const double identity =
        std::abs(report.s_value * report.s_value +
                 report.residual_distance * report.residual_distance - g2) /
        g2;
    t.record(stationarity_sandwich_check(x, report) && identity <= 1e-9,
             identity);
  }
  return t.result("variety: ||grad|| >= s_f >= sqrt((r-k)/(min(m,n)-k))||grad||");
}

PropertyResult curve_identity(Sampler &s) {
  Tally t;
  for (int k = 0; k < 200; ++k) {
    auto sh = random_shape(s);
    sh.rank = std::max<Index>(sh.rank, 1);
    const auto x = s.point(sh.m, sh.n, sh.r, sh.rank);
    const auto tangent = project_to_tangent_cone(x, s.tangent_vector(x));
    const double tt = s.uniform(0.0, 2.0);
    const Matrix gamma = tangent_curve_gamma(x, tangent.blocks, tt);
    const Matrix expected = x.matrix() + tt * tangent.projected +
                            tt * tt * tangent_curve_quadratic_term(
                                          x, tangent.blocks);
    const double rel = (gamma - expected).norm() / (1.0 + expected.norm());
    const bool low_rank = numerical_rank(gamma) <= sh.r;
    t.record(rel <= 1e-9 && low_rank, rel);
  }
  return t.result("variety: gamma(t) = X + tG + t^2 Q and rank gamma <= r");
}

PropertyResult distance_bound(Sampler &s) {
  Tally t;
  for (int k = 0; k < 300; ++k) {
    auto sh = random_shape(s);
    sh.rank = std::max<Index>(sh.rank, 1);
    const auto x = s.point(sh.m, sh.n, sh.r, sh.rank, 0.2, 3.0);
    const Matrix g = s.uniform(0.0, 2.0) * s.tangent_vector(x);
    const double d = distance_to_bounded_rank(x.matrix() + g, sh.r);
    const double bound = tangent_line_distance_bound(x, g.norm());
    t.record(d <= bound + 1e-10, d - bound);
  }
  return t.result("variety: d(X+G) <= sqrt(rank)/(2 sigma_min) ||G||^2");
}

PropertyResult continuity(Sampler &s) {
  Tally t;
  for (int k = 0; k < 10; ++k) {
    const Index m = 7, n = 6, r = 3, rank = s.integer(1, 3);
    const auto x = s.point(m, n, r, rank, 1.0, 3.0);
    const LowRankApproxProblem f(s.gaussian(m, n));
    const double s0 = stationarity_measure(f, x).s_value;
    std::vector<double> deviation;
    for (double h : {1e-2, 1e-3, 1e-4}) {
      double worst = 0.0;
      for (int q = 0; q < 10; ++q) {
        const Matrix u = x.u() + h * s.gaussian(m, rank);
        const Matrix v = x.v() + h * s.gaussian(n, rank);
        const Matrix core =
            Matrix(x.sigma().asDiagonal()) + h * s.gaussian(rank, rank);
        const auto y =
            VarietyPoint::from_matrix(u * core * v.transpose(), r);
        if (y.rank() != rank)
          continue;
        worst = std::max(worst,
                         std::abs(stationarity_measure(f, y).s_value - s0));
      }
      deviation.push_back(worst);
    }
    t.record(deviation[0] > deviation[1] && deviation[1] > deviation[2],
             deviation[2]);
  }
  return t.result("variety: s_f on a fixed-rank stratum varies continuously");
}

PropertyResult tightness_fixture() {
  Tally t;
  const auto inst = appendix_tightness_instance(2, 3, 3, 0.25);
  const double d =
      distance_to_bounded_rank(inst.point.matrix() + inst.g, 2);
  const double expected_d = (std::sqrt(5.0) - 1.0) / 2.0;
  const double g2 = inst.g.squaredNorm();
  const double ratio = d / g2;
  t.record(std::abs(d - expected_d) <= 1e-10, std::abs(d - expected_d));
  t.record(std::abs(g2 - 2.0) <= 1e-12, std::abs(g2 - 2.0));
  t.record(std::abs(ratio - (std::sqrt(5.0) - 1.0) / 4.0) <= 1e-10 &&
           ratio >= 0.5 - 0.25 - 1e-10);
  t.record(inst.point.sigma_min() == inst.sigma);
  t.record(ratio <= tangent_line_distance_bound(inst.point, inst.g.norm()) /
                        g2 + 1e-12);
  return t.result("variety: tightness instance (r=2, m=n=3, eps=0.25)");
}

std::vector<std::shared_ptr<CostFunction>> built_in_problems(Sampler &s) {
  std::vector<std::shared_ptr<CostFunction>> out;
  out.push_back(std::make_shared<LowRankApproxProblem>(s.gaussian(5, 4)));
  Matrix mask = (s.gaussian(5, 4).array() > 0.0).cast<double>();
  out.push_back(
      std::make_shared<MatrixCompletionProblem>(s.gaussian(5, 4), mask));
  std::vector<PolynomialTerm> terms{
      {{{0, 0, 2}, {1, 1, 2}}, 0.5},
      {{{2, 1, 1}, {0, 2, 1}, {1, 0, 1}}, -1.5},
      {{{3, 3, 4}}, 0.25},
      {{{0, 1, 1}}, 2.0},
      {{}, 1.0}};
  out.push_back(std::make_shared<PolynomialProblem>(5, 4, terms));
  return out;
}

PropertyResult gradient_checks(Sampler &s) {
  Tally t;
  for (const auto &problem : built_in_problems(s))
    for (int k = 0; k < 100; ++k) {
      const Matrix x = s.gaussian(problem->rows(), problem->cols());
      const double err = finite_difference_check(*problem, x, 1e-5);
      t.record(err <= 1e-6, err);
    }
  return t.result("problems: analytic gradients match finite differences");
}

PropertyResult truncation_is_stationary(Sampler &s) {
  Tally t;
  for (int k = 0; k < 100; ++k) {
    const Index m = s.integer(3, 10), n = s.integer(3, 10);
    const Index r = s.integer(1, std::min(m, n) - 1);
    const Matrix a = s.gaussian(m, n);
    const auto svd = compute_svd(a);
    if (!(svd.sigma(r - 1) > svd.sigma(r) + 1e-8))
      continue;
    const LowRankApproxProblem f(a);
    const auto x =
        VarietyPoint::from_svd(svd, m, n, r); // keeps leading r triplets
    const double sv = stationarity_measure(f, x).s_value;
    t.record(sv <= 1e-8 * (1.0 + a.norm()), sv);
  }
  return t.result("problems: Eckart-Young truncation is stationary");
}

PropertyResult completion_full_mask(Sampler &s) {
  Tally t;
  for (int k = 0; k < 50; ++k) {
    const Index m = s.integer(1, 8), n = s.integer(1, 8);
    const Matrix a = s.gaussian(m, n);
    const LowRankApproxProblem lr(a);
    const MatrixCompletionProblem mc(a, Matrix::Ones(m, n));
    const Matrix x = s.gaussian(m, n);
    const double de = std::abs(lr.eval(x) - mc.eval(x));
    const double dg = (lr.gradient(x) - mc.gradient(x)).cwiseAbs().maxCoeff();
    t.record(de <= 1e-14 * (1 + lr.eval(x)) && dg == 0.0, de);
  }
  return t.result("problems: full-mask completion equals approximation");
}

SolverParams solver_params(Index r, double delta, double stop_tol = 1e-8) {
  SolverParams p;
  p.rank_bound = r;
  p.delta = delta;
  p.stop_tol = stop_tol;
  p.max_iters = 300;
  return p;
}

// Strict descent is only observable in double precision when the Armijo
// guarantee c * alpha * s^2 exceeds the rounding level of f itself.
bool decrease_resolvable(double f, double guaranteed, Index entries) {
  return guaranteed >
         static_cast<double>(entries) * 2.220446049250313e-16 *
             std::max(1.0, std::abs(f));
}

PropertyResult solver_certificates(Sampler &s) {
  Tally t;
  const double c = LineSearchParams{}.c;
  for (int k = 0; k < 10; ++k) {
    const Index m = s.integer(4, 9), n = s.integer(4, 9);
    const Index r = s.integer(1, 3);
    const Matrix a = s.gaussian(m, n);
    std::shared_ptr<CostFunction> f;
    if (k % 2 == 0)
      f = std::make_shared<LowRankApproxProblem>(a);
    else
      f = std::make_shared<MatrixCompletionProblem>(
          a, (s.gaussian(m, n).array() > -0.5).cast<double>());
    const Matrix x0 = truncate_to_rank(s.gaussian(m, n), r).matrix;
    // s_f below ~sqrt(eps |f| mn) is not resolvable by the Armijo test.
    const auto trace = p2gdr(*f, x0, solver_params(r, 0.3, 1e-6));
    bool ok = trace.termination != Termination::LineSearchFailure;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const auto &rec = trace.records[i];
      const double f_next = i + 1 < trace.records.size()
                                ? trace.records[i + 1].f_value
                                : trace.final_f;
      const double guaranteed =
          c * rec.accepted_alpha * rec.s_value * rec.s_value;
      ok = ok && f_next <= rec.f_value && rec.rank <= r &&
           rec.chosen_j <= rec.rank - rec.delta_rank;
      if (rec.chosen_j == 0) {
        ok = ok && f_next <= rec.f_value - guaranteed;
        if (decrease_resolvable(rec.f_value, guaranteed, m * n))
          ok = ok && f_next < rec.f_value;
      }
    }
    ok = ok && trace.final_point.rank() <= r;
    t.record(ok);
  }
  return t.result("solver: feasibility, descent, Armijo certificate");
}

PropertyResult step_floor(Sampler &s) {
  Tally t;
  const LineSearchParams ls;
  for (int k = 0; k < 100; ++k) {
    const auto sh = random_shape(s, 8, 3);
    const LowRankApproxProblem f(3.0 * s.gaussian(sh.m, sh.n));
    const auto x = s.point(sh.m, sh.n, sh.r, sh.rank, 0.05, 3.0);
    if (stationarity_measure(f, x).s_value <= 1e-12)
      continue;
    const auto step = p2gd_step(f, x, ls);
    const double floor =
        step_size_floor(ls, kappa_bound(f, x, ls.alpha_hi, 1.0));
    const bool armijo = step.f_after <= step.f_before - ls.c *
                                                           step.accepted_alpha *
                                                           step.s_before *
                                                           step.s_before;
    t.record(step.accepted_alpha >= floor && armijo,
             floor - step.accepted_alpha);
  }
  return t.result("solver: accepted step >= min{alpha_lo, beta(1-c)/kappa}");
}

PropertyResult candidate_dominance(Sampler &s) {
  Tally t;
  for (int k = 0; k < 50; ++k) {
    const Index m = 6, n = 5, r = 3;
    const LowRankApproxProblem f(s.gaussian(m, n));
    Vector sigma(3);
    sigma << s.uniform(1.0, 2.0), s.uniform(0.01, 0.2), s.uniform(0.001, 0.01);
    const auto x = VarietyPoint::from_factors(s.orthonormal(m, 3), sigma,
                                              s.orthonormal(n, 3), r);
    const auto params = solver_params(r, 0.5);
    const auto search = p2gdr_search(f, x, params, 1e-12);
    const auto plain = p2gd_step(f, x, params.line_search);
    t.record(search.next_f <= plain.f_after &&
                 search.record.candidates_evaluated ==
                     static_cast<int>(x.rank() - x.delta_rank(0.5) + 1),
             search.next_f - plain.f_after);
  }
  return t.result("solver: rank reduction never loses to the plain step");
}

PropertyResult determinism(Sampler &s) {
  Tally t;
  const Matrix a = s.gaussian(8, 6);
  const Matrix mask = (s.gaussian(8, 6).array() > -0.3).cast<double>();
  const MatrixCompletionProblem f(a, mask);
  const auto params = solver_params(2, 0.2);
  const auto t1 = p2gdr(f, Matrix::Zero(8, 6), params);
  const auto t2 = p2gdr(f, Matrix::Zero(8, 6), params);
  t.record(io::trace_to_csv(t1) == io::trace_to_csv(t2));
  return t.result("solver: identical inputs give identical traces");
}

PropertyResult factored_projection(Sampler &s) {
  Tally t;
  for (int k = 0; k < 100; ++k) {
    const auto sh = random_shape(s);
    const auto x = s.point(sh.m, sh.n, sh.r, sh.rank);
    const auto dir = project_to_tangent_cone(x, s.gaussian(sh.m, sh.n));
    const double alpha = s.uniform(0.01, 1.0);
    const auto ya =
        project_sum_to_variety(x, dir, alpha, ProjectionMethod::Ambient);
    const auto yf =
        project_sum_to_variety(x, dir, alpha, ProjectionMethod::Factored);
    const double err = (ya.matrix() - yf.matrix()).norm() /
                       (1.0 + ya.matrix().norm());
    t.record(err <= 1e-10 && ya.rank() == yf.rank(), err);
  }
  return t.result("solver: factored projection agrees with ambient SVD");
}

PropertyResult format_round_trip(Sampler &s) {
  Tally t;
  for (int k = 0; k < 20; ++k) {
    const Matrix x = s.gaussian(s.integer(1, 6), s.integer(1, 6)) *
                     std::pow(10.0, s.uniform(-8, 8));
    const Matrix from_csv = io::matrix_from_csv(io::matrix_to_csv(x));
    const Matrix from_json = io::matrix_from_json(
        io::Json::parse(io::matrix_to_json(x).dump()));
    t.record(from_csv == x && from_json == x);
  }
  return t.result("io: CSV and JSON matrices round-trip bit-exactly");
}

} // namespace

std::vector<PropertyResult> run_property_suite(std::uint64_t seed) {
  Sampler s(seed);
  using Check = std::function<PropertyResult()>;
  const std::vector<Check> checks{
      [&] { return svd_reconstruction(s); },
      [&] { return singular_value_lipschitz(s); },
      [&] { return truncation_norm_identity(s); },
      [&] { return delta_rank_monotone(s); },
      [&] { return local_delta_rank(s); },
      [&] { return projection_optimality(s); },
      [&] { return frame_invariance(s); },
      [&] { return sandwich(s); },
      [&] { return curve_identity(s); },
      [&] { return distance_bound(s); },
      [&] { return continuity(s); },
      [] { return tightness_fixture(); },
      [&] { return gradient_checks(s); },
      [&] { return truncation_is_stationary(s); },
      [&] { return completion_full_mask(s); },
      [&] { return solver_certificates(s); },
      [&] { return step_floor(s); },
      [&] { return candidate_dominance(s); },
      [&] { return determinism(s); },
      [&] { return factored_projection(s); },
      [&] { return format_round_trip(s); },
  };
  std::vector<PropertyResult> results;
  for (const auto &check : checks) {
    try {
      results.push_back(check());
    } catch (const std::exception &e) {
      results.push_back({"(check threw)", false, e.what()});
    }
  }
  return results;
}

} // namespace lowrank
