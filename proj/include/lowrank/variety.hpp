#pragma once

#include "lowrank/linalg.hpp"
#include "lowrank/problems.hpp"

namespace lowrank {

/// A point of the bounded-rank variety R_{<=r}^{m x n}, held in thin-SVD
/// form U diag(sigma) V^T with rank() = sigma.size(). The factored form is
/// the source of truth for the rank; it is never re-derived from the
/// ambient matrix.
class VarietyPoint {
public:
  /// Zero matrix of the given shape.
  VarietyPoint(Index rows, Index cols, Index rank_bound);

  /// Validates orthonormality of the factors, positivity and ordering of
  /// sigma, and rank <= rank_bound < min(rows, cols).
  static VarietyPoint from_factors(Matrix u, Vector sigma, Matrix v,
                                   Index rank_bound);

  /// Factors a matrix whose numerical rank is at most rank_bound; throws
  /// InfeasiblePointError otherwise.
  static VarietyPoint from_matrix(const Matrix &x, Index rank_bound,
                                  double rank_rel_tol = 1.0);

  /// Keeps the leading min(rank_bound, numerical_rank) triplets of an SVD
  /// of an m x n matrix: an element of P_{R_{<=r}} of that matrix.
  static VarietyPoint from_svd(const SvdFactorization &svd, Index rows,
                               Index cols, Index rank_bound);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index rank() const { return sigma_.size(); }
  Index rank_bound() const { return rank_bound_; }

  const Matrix &u() const { return u_; }
  const Vector &sigma() const { return sigma_; }
  const Matrix &v() const { return v_; }

  /// Smallest nonzero singular value; DomainError at the zero matrix.
  double sigma_min() const;

  /// Leading `target` triplets; an element of P_{R_target}(X).
  VarietyPoint truncated(Index target) const;

  Index delta_rank(double delta) const;

  Matrix matrix() const;

private:
  VarietyPoint(Matrix u, Vector sigma, Matrix v, Index rows, Index cols,
               Index rank_bound);

  Matrix u_;
  Vector sigma_;
  Matrix v_;
  Index rows_;
  Index cols_;
  Index rank_bound_;
};

/// Blocks of a matrix G in the SVD frame of X, stored without forming
/// U_perp or V_perp:
///   a      = U^T G V                  (A)
///   b_rows = U^T G (I - V V^T)        (U B V_perp^T = U b_rows)
///   c_cols = (I - U U^T) G V          (U_perp C V^T = c_cols V^T)
/// and the Eckart-Young truncation of D (to rank r - rank X) as factors of
/// the m x n matrix U_perp D V_perp^T.
struct TangentDecomposition {
  Matrix a;
  Matrix b_rows;
  Matrix c_cols;
  Matrix d_u;
  Vector d_sigma;
  Matrix d_v;
  double d_residual_norm = 0.0;

  Matrix d_truncated() const;
  double norm() const;
};

struct TangentProjection {
  TangentDecomposition blocks;
  Matrix projected;
  double norm = 0.0;
};

TangentProjection project_to_tangent_cone(const VarietyPoint &point,
                                          const Matrix &g);

struct StationarityReport {
  double s_value = 0.0;
  double gradient_norm = 0.0;
  double residual_distance = 0.0;
};

/// s_f(X) = ||P_T(-grad f(X))|| and d(-grad f(X), T).
StationarityReport stationarity_measure(const CostFunction &problem,
                                        const VarietyPoint &point);
StationarityReport stationarity_from_projection(const Matrix &gradient,
                                                const TangentProjection &proj);

/// ||grad f|| >= s_f >= sqrt((r - rank X) / (min(m,n) - rank X)) ||grad f||,
/// each with additive slack 1e-9 * ||grad f||.
bool stationarity_sandwich_check(const VarietyPoint &point,
                                 const StationarityReport &report);

/// gamma(t) = (U + t(U_perp C + A'/2)S^-1) S (V + t(V_perp B^T + ...)S^-1)^T
///            + t U_perp D V_perp^T,
/// a curve in R_{<=r} leaving X along the tangent vector described by
/// `tangent`. Requires rank X >= 1.
Matrix tangent_curve_gamma(const VarietyPoint &point,
                           const TangentDecomposition &tangent, double t);

/// gamma(t) - X - tG / t^2, i.e.
/// 1/4 (U A + 2 U_perp C) S^-1 (A V^T + 2 B V_perp^T).
Matrix tangent_curve_quadratic_term(const VarietyPoint &point,
                                    const TangentDecomposition &tangent);

/// sqrt(rank X) / (2 sigma_min(X)) * ||G||^2, an upper bound on
/// d(X + G, R_{<=r}) for G in the tangent cone at X.
double tangent_line_distance_bound(const VarietyPoint &point,
                                   double tangent_norm);

struct TightnessInstance {
  VarietyPoint point;
  Matrix g;
  double sigma = 0.0;
};

/// X = s diag(2 I_{r-1}, [1 0; 0 0], 0), G = s diag(0, [0 1; 1 0], 0) with
/// s = 1/(4 epsilon): the distance bound above is attained up to epsilon.
TightnessInstance appendix_tightness_instance(Index rank_bound, Index rows,
                                              Index cols, double epsilon);

} // namespace lowrank
