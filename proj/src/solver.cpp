#include "lowrank/solver.hpp"

#include "lowrank/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace lowrank {

void LineSearchParams::validate() const {
  if (!(alpha_lo > 0.0) || !(alpha_lo < alpha_hi) || !std::isfinite(alpha_hi))
    throw ArgumentError("line search needs 0 < alpha_lo < alpha_hi < inf");
  if (!(beta > 0.0 && beta < 1.0))
    throw ArgumentError("line search beta must lie in (0, 1)");
  if (!(c > 0.0 && c < 1.0))
    throw ArgumentError("line search c must lie in (0, 1)");
  if (max_backtracks <= 0)
    throw ArgumentError("max_backtracks must be positive");
  if (initial_alpha &&
      !(*initial_alpha >= alpha_lo && *initial_alpha <= alpha_hi))
    throw ArgumentError("initial_alpha must lie in [alpha_lo, alpha_hi]");
}

void SolverParams::validate() const {
  line_search.validate();
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ArgumentError("delta must be positive and finite");
  if (stop_tol && !(*stop_tol >= 0.0))
    throw ArgumentError("stop_tol must be nonnegative");
  if (max_iters <= 0)
    throw ArgumentError("max_iters must be positive");
  if (rank_bound < 0)
    throw ArgumentError("rank_bound must be nonnegative");
  if (!(rank_rel_tol > 0.0))
    throw ArgumentError("rank_rel_tol must be positive");
}

std::string to_string(Termination t) {
  switch (t) {
  case Termination::Stationary:
    return "stationary";
  case Termination::MaxIters:
    return "max_iters";
  case Termination::LineSearchFailure:
    return "line_search_failure";
  }
  return "unknown";
}

namespace {

// Y from the SVD of the assembled sum.
VarietyPoint project_ambient(const VarietyPoint &point,
                             const TangentProjection &direction, double alpha,
                             double rank_rel_tol) {
  const Matrix sum = point.matrix() + alpha * direction.projected;
  return VarietyPoint::from_svd(compute_svd(sum, rank_rel_tol), point.rows(),
                                point.cols(), point.rank_bound());
}

// X + alpha G = L R with
//   L = [U | c_cols | D_u],
//   R = [(S + alpha A) V^T + alpha b_rows ; alpha V^T ; alpha D_s D_v^T].
VarietyPoint project_factored(const VarietyPoint &point,
                              const TangentProjection &direction, double alpha,
                              double rank_rel_tol) {
  const auto &blk = direction.blocks;
  const Index m = point.rows();
  const Index n = point.cols();
  const Index k = point.rank();
  const Index kd = blk.d_sigma.size();
  const Index p = 2 * k + kd;
  if (p == 0)
    return VarietyPoint(m, n, point.rank_bound());

  Matrix left(m, p);
  left << point.u(), blk.c_cols, blk.d_u;
  Matrix right(p, n);
  Matrix core_a = alpha * blk.a;
  core_a.diagonal() += point.sigma();
  right << core_a * point.v().transpose() + alpha * blk.b_rows,
      alpha * point.v().transpose(),
      alpha * blk.d_sigma.asDiagonal() * blk.d_v.transpose();

  Eigen::HouseholderQR<Matrix> qr_left(left);
  Eigen::HouseholderQR<Matrix> qr_right(right.transpose());
  const Index pl = std::min(m, p);
  const Index pr = std::min(n, p);
  const Matrix q_left = qr_left.householderQ() * Matrix::Identity(m, pl);
  const Matrix q_right = qr_right.householderQ() * Matrix::Identity(n, pr);
  const Matrix r_left =
      qr_left.matrixQR().topRows(pl).triangularView<Eigen::Upper>();
  const Matrix r_right =
      qr_right.matrixQR().topRows(pr).triangularView<Eigen::Upper>();

  const auto core = compute_svd(r_left * r_right.transpose(), rank_rel_tol);
  SvdFactorization svd;
  svd.u = q_left * core.u;
  svd.sigma = core.sigma;
  svd.v = q_right * core.v;
  // Thresholds refer to the m x n matrix, not the core.
  const double smax = svd.sigma.size() > 0 ? svd.sigma(0) : 0.0;
  svd.threshold = rank_threshold(smax, m, n, rank_rel_tol);
  svd.numerical_rank = 0;
  for (Index j = 0; j < svd.sigma.size(); ++j)
    if (svd.sigma(j) > svd.threshold)
      ++svd.numerical_rank;
  return VarietyPoint::from_svd(svd, m, n, point.rank_bound());
}

struct Evaluated {
  VarietyPoint point;
  double f = 0.0;
  Matrix gradient;
  TangentProjection descent; // projection of -grad f
};

Evaluated evaluate(const CostFunction &problem, VarietyPoint point) {
  const Matrix x = point.matrix();
  Evaluated e{std::move(point), problem.eval(x), problem.gradient(x), {}};
  e.descent = project_to_tangent_cone(e.point, -e.gradient);
  return e;
}

StepOutcome step_from(const CostFunction &problem, const Evaluated &at,
                      const LineSearchParams &params, ProjectionMethod method,
                      double rank_rel_tol) {
  const double s = at.descent.norm;
  if (!(s > 0.0))
    throw ArgumentError("p2gd_step requires a non-stationary point");

  double alpha = params.first_alpha();
  for (int backtracks = 0;; ++backtracks) {
    VarietyPoint y =
        method == ProjectionMethod::Ambient
            ? project_ambient(at.point, at.descent, alpha, rank_rel_tol)
            : project_factored(at.point, at.descent, alpha, rank_rel_tol);
    const double fy = problem.eval(y.matrix());
    if (fy <= at.f - params.c * alpha * s * s)
      return {std::move(y), alpha, backtracks, at.f, fy, s};
    if (backtracks == params.max_backtracks)
      throw LineSearchFailure("Armijo condition not met after " +
                                  std::to_string(backtracks) +
                                  " backtracks (alpha = " +
                                  std::to_string(alpha) + ")",
                              alpha);
    alpha *= params.beta;
  }
}

SearchResult search_from(const CostFunction &problem, const Evaluated &at,
                         const SolverParams &params, double stop_tol,
                         bool allow_reduction) {
  const Index rank = at.point.rank();
  const Index drank = at.point.delta_rank(params.delta);
  const Index j_max = allow_reduction ? rank - drank : 0;

  IterationRecord record;
  record.f_value = at.f;
  record.s_value = at.descent.norm;
  record.rank = rank;
  record.delta_rank = drank;
  record.candidates_evaluated = static_cast<int>(j_max + 1);

  std::optional<VarietyPoint> best;
  double best_f = std::numeric_limits<double>::infinity();

  for (Index j = 0; j <= j_max; ++j) {
    try {
      VarietyPoint candidate(at.point.rows(), at.point.cols(),
                             at.point.rank_bound());
      double candidate_f = 0.0;
      double alpha = 0.0;
      if (j == 0) {
        auto step = step_from(problem, at, params.line_search,
                              params.projection, params.rank_rel_tol);
        candidate = std::move(step.next_point);
        candidate_f = step.f_after;
        alpha = step.accepted_alpha;
      } else {
        const Evaluated reduced =
            evaluate(problem, at.point.truncated(rank - j));
        if (reduced.descent.norm <= stop_tol) {
          candidate = reduced.point;
          candidate_f = reduced.f;
        } else {
          auto step = step_from(problem, reduced, params.line_search,
                                params.projection, params.rank_rel_tol);
          candidate = std::move(step.next_point);
          candidate_f = step.f_after;
          alpha = step.accepted_alpha;
        }
      }
      if (candidate_f < best_f) {
        best_f = candidate_f;
        best = std::move(candidate);
        record.chosen_j = j;
        record.accepted_alpha = alpha;
      }
    } catch (const LineSearchFailure &e) {
      throw LineSearchFailure(std::string(e.what()) + " at candidate j = " +
                                  std::to_string(j),
                              e.last_alpha, static_cast<int>(j));
    }
  }
  return {std::move(*best), record, best_f};
}

Trace run(const CostFunction &problem, const Matrix &x0,
          const SolverParams &params, bool allow_reduction) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  if (x0.rows() != problem.rows() || x0.cols() != problem.cols())
    throw ArgumentError("x0 shape does not match the problem");
  require_finite(x0, "x0");

  Evaluated current =
      evaluate(problem, VarietyPoint::from_matrix(x0, params.rank_bound,
                                                  params.rank_rel_tol));
  const double stop_tol = params.stop_tol.value_or(
      1e-8 * (1.0 + current.gradient.norm()));

  Trace trace{{}, current.point, 0.0, 0.0, Termination::Stationary, stop_tol,
              0.0, {}};
  for (int i = 0;; ++i) {
    if (current.descent.norm <= stop_tol) {
      trace.termination = Termination::Stationary;
      break;
    }
    if (i >= params.max_iters) {
      trace.termination = Termination::MaxIters;
      break;
    }
    std::optional<SearchResult> result;
    try {
      result = search_from(problem, current, params, stop_tol,
                           allow_reduction);
    } catch (const LineSearchFailure &e) {
      trace.termination = Termination::LineSearchFailure;
      trace.message = e.what();
      break;
    }
    result->record.index = i;
    trace.records.push_back(result->record);
    current = evaluate(problem, std::move(result->next_point));
  }

  trace.final_point = current.point;
  trace.final_f = current.f;
  trace.final_s = current.descent.norm;
  trace.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  return trace;
}

} // namespace

VarietyPoint project_sum_to_variety(const VarietyPoint &point,
                                    const TangentProjection &direction,
                                    double alpha, ProjectionMethod method,
                                    double rank_rel_tol) {
  return method == ProjectionMethod::Ambient
             ? project_ambient(point, direction, alpha, rank_rel_tol)
             : project_factored(point, direction, alpha, rank_rel_tol);
}

StepOutcome p2gd_step(const CostFunction &problem, const VarietyPoint &point,
                      const LineSearchParams &params, ProjectionMethod method,
                      double rank_rel_tol) {
  params.validate();
  return step_from(problem, evaluate(problem, point), params, method,
                   rank_rel_tol);
}

double kappa_bound(const CostFunction &problem, const VarietyPoint &point,
                   double alpha_hi, double lipschitz) {
  if (!(lipschitz > 0.0))
    throw ArgumentError("Lipschitz constant must be positive");
  if (!(alpha_hi > 0.0))
    throw ArgumentError("alpha_hi must be positive");
  if (point.rank() == 0)
    return 0.5 * lipschitz;
  const auto report = stationarity_measure(problem, point);
  const double curvature = std::sqrt(static_cast<double>(point.rank())) /
                           (2.0 * point.sigma_min());
  const double inner = curvature * alpha_hi * report.s_value + 1.0;
  return curvature * report.gradient_norm + 0.5 * lipschitz * inner * inner;
}

double step_size_floor(const LineSearchParams &params, double kappa) {
  return std::min(params.alpha_lo, params.beta * (1.0 - params.c) / kappa);
}

SearchResult p2gdr_search(const CostFunction &problem,
                          const VarietyPoint &point,
                          const SolverParams &params, double stop_tol,
                          bool allow_reduction) {
  params.validate();
  const Evaluated at = evaluate(problem, point);
  if (!(at.descent.norm > stop_tol))
    throw ArgumentError("p2gdr_search requires s_f(point) > stop_tol");
  return search_from(problem, at, params, stop_tol, allow_reduction);
}

Trace p2gdr(const CostFunction &problem, const Matrix &x0,
            const SolverParams &params) {
  return run(problem, x0, params, true);
}

Trace p2gd_plain(const CostFunction &problem, const Matrix &x0,
                 const SolverParams &params) {
  return run(problem, x0, params, false);
}

double default_stop_tol(const CostFunction &problem, const Matrix &x0) {
  return 1e-8 * (1.0 + problem.gradient(x0).norm());
}

} // namespace lowrank
