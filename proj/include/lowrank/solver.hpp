#pragma once

#include "lowrank/problems.hpp"
#include "lowrank/variety.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lowrank {

struct LineSearchParams {
  double alpha_lo = 1e-8;
  double alpha_hi = 1.0;
  double beta = 0.5;
  double c = 1e-4;
  int max_backtracks = 60;
  /// First trial step; must lie in [alpha_lo, alpha_hi]. Defaults to
  /// alpha_hi.
  std::optional<double> initial_alpha;

  void validate() const;
  double first_alpha() const { return initial_alpha.value_or(alpha_hi); }
};

/// How Y in P_{R<=r}(X + alpha G) is computed.
enum class ProjectionMethod {
  /// SVD of the assembled m x n matrix.
  Ambient,
  /// QR of the concatenated factors (rank <= rank X + r), then an SVD of
  /// the small core.
  Factored,
};

struct SolverParams {
  LineSearchParams line_search;
  double delta = 1e-3;
  /// Threshold on s_f. Unset means 1e-8 * (1 + ||grad f(X0)||).
  std::optional<double> stop_tol;
  int max_iters = 1000;
  Index rank_bound = 1;
  double rank_rel_tol = 1.0;
  ProjectionMethod projection = ProjectionMethod::Ambient;

  void validate() const;
};

struct StepOutcome {
  VarietyPoint next_point;
  double accepted_alpha = 0.0;
  int backtrack_count = 0;
  double f_before = 0.0;
  double f_after = 0.0;
  double s_before = 0.0;
};

struct IterationRecord {
  int index = 0;
  double f_value = 0.0;
  double s_value = 0.0;
  Index rank = 0;
  Index delta_rank = 0;
  Index chosen_j = 0;
  /// 0 when the winning candidate was a reduced point that was already
  /// stationary and took no step.
  double accepted_alpha = 0.0;
  int candidates_evaluated = 0;
};

enum class Termination { Stationary, MaxIters, LineSearchFailure };

std::string to_string(Termination t);

struct Trace {
  std::vector<IterationRecord> records;
  VarietyPoint final_point;
  double final_f = 0.0;
  double final_s = 0.0;
  Termination termination = Termination::Stationary;
  double stop_tol = 0.0;
  double wall_time_ms = 0.0;
  /// Diagnostic for line-search failures.
  std::string message;
};

/// An element of P_{R<=r}(x + alpha g) for x a variety point and g a tangent
/// vector at x; `rank_bound` taken from the point.
VarietyPoint project_sum_to_variety(const VarietyPoint &point,
                                    const TangentProjection &direction,
                                    double alpha, ProjectionMethod method,
                                    double rank_rel_tol = 1.0);

/// One projected steepest-descent step with Armijo backtracking. Requires
/// s_f(point) > 0; throws LineSearchFailure after max_backtracks
/// reductions.
StepOutcome p2gd_step(const CostFunction &problem, const VarietyPoint &point,
                      const LineSearchParams &params,
                      ProjectionMethod method = ProjectionMethod::Ambient,
                      double rank_rel_tol = 1.0);

/// kappa_B(f, X, alpha_hi) for a Lipschitz constant L of grad f on a ball
/// containing every P_{R<=r}(X + alpha G), alpha in [0, alpha_hi].
double kappa_bound(const CostFunction &problem, const VarietyPoint &point,
                   double alpha_hi, double lipschitz);

/// Lower bound min{alpha_lo, beta (1 - c) / kappa} on any accepted step.
double step_size_floor(const LineSearchParams &params, double kappa);

struct SearchResult {
  VarietyPoint next_point;
  IterationRecord record;
  double next_f = 0.0;
};

/// Runs a P2GD step from each rank reduction of `point` down to its
/// delta-rank and keeps the candidate of lowest cost (smallest j on ties).
/// With `allow_reduction` false only j = 0 is tried. Line-search failures
/// are rethrown with the offending j.
SearchResult p2gdr_search(const CostFunction &problem,
                          const VarietyPoint &point,
                          const SolverParams &params, double stop_tol,
                          bool allow_reduction = true);

Trace p2gdr(const CostFunction &problem, const Matrix &x0,
            const SolverParams &params);

/// Same loop with the search restricted to j = 0.
Trace p2gd_plain(const CostFunction &problem, const Matrix &x0,
                 const SolverParams &params);

double default_stop_tol(const CostFunction &problem, const Matrix &x0);

} // namespace lowrank
