#include "lowrank/variety.hpp"

#include "lowrank/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace lowrank {

namespace {

constexpr double kOrthonormalityTol = 1e-8;

void check_rank_bound(Index rows, Index cols, Index rank_bound) {
  if (rows <= 0 || cols <= 0)
    throw ArgumentError("variety shape must be positive");
  if (rank_bound < 0 || rank_bound >= std::min(rows, cols))
    throw ArgumentError("rank bound " + std::to_string(rank_bound) +
                        " must lie in [0, min(m, n))");
}

bool orthonormal_columns(const Matrix &q) {
  if (q.cols() == 0)
    return true;
  const Matrix gram = q.transpose() * q;
  return (gram - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff() <=
         kOrthonormalityTol;
}

} // namespace

VarietyPoint::VarietyPoint(Index rows, Index cols, Index rank_bound)
    : u_(rows, 0), sigma_(0), v_(cols, 0), rows_(rows), cols_(cols),
      rank_bound_(rank_bound) {
  check_rank_bound(rows, cols, rank_bound);
}

VarietyPoint::VarietyPoint(Matrix u, Vector sigma, Matrix v, Index rows,
                           Index cols, Index rank_bound)
    : u_(std::move(u)), sigma_(std::move(sigma)), v_(std::move(v)),
      rows_(rows), cols_(cols), rank_bound_(rank_bound) {}

VarietyPoint VarietyPoint::from_factors(Matrix u, Vector sigma, Matrix v,
                                        Index rank_bound) {
  const Index m = u.rows();
  const Index n = v.rows();
  check_rank_bound(m, n, rank_bound);
  const Index k = sigma.size();
  if (u.cols() != k || v.cols() != k)
    throw ArgumentError("factor widths do not match sigma length");
  if (k > rank_bound)
    throw InfeasiblePointError("factored rank " + std::to_string(k) +
                               " exceeds bound " + std::to_string(rank_bound));
  if (!u.allFinite() || !v.allFinite() || !sigma.allFinite())
    throw ArgumentError("factors must be finite");
  if (!orthonormal_columns(u) || !orthonormal_columns(v))
    throw ArgumentError("factors must have orthonormal columns");
  for (Index j = 0; j < k; ++j) {
    if (!(sigma(j) > 0.0))
      throw ArgumentError("singular values must be positive");
    if (j > 0 && sigma(j) > sigma(j - 1))
      throw ArgumentError("singular values must be nonincreasing");
  }
  if (k > 0 && !(sigma(k - 1) > rank_threshold(sigma(0), m, n)))
    throw ArgumentError("smallest singular value is below the rank threshold");
  return VarietyPoint(std::move(u), std::move(sigma), std::move(v), m, n,
                      rank_bound);
}

VarietyPoint VarietyPoint::from_svd(const SvdFactorization &svd, Index rows,
                                    Index cols, Index rank_bound) {
  check_rank_bound(rows, cols, rank_bound);
  const Index k = std::min(rank_bound, svd.numerical_rank);
  return VarietyPoint(svd.u.leftCols(k), svd.sigma.head(k), svd.v.leftCols(k),
                      rows, cols, rank_bound);
}

VarietyPoint VarietyPoint::from_matrix(const Matrix &x, Index rank_bound,
                                       double rank_rel_tol) {
  check_rank_bound(x.rows(), x.cols(), rank_bound);
  const auto svd = compute_svd(x, rank_rel_tol);
  if (svd.numerical_rank > rank_bound)
    throw InfeasiblePointError("matrix has numerical rank " +
                               std::to_string(svd.numerical_rank) +
                               " above the bound " +
                               std::to_string(rank_bound));
  return from_svd(svd, x.rows(), x.cols(), rank_bound);
}

double VarietyPoint::sigma_min() const {
  if (rank() == 0)
    throw DomainError("sigma_min is undefined at the zero matrix");
  return sigma_(rank() - 1);
}

VarietyPoint VarietyPoint::truncated(Index target) const {
  if (target < 0 || target > rank())
    throw ArgumentError("truncation target outside [0, rank]");
  return VarietyPoint(u_.leftCols(target), sigma_.head(target),
                      v_.leftCols(target), rows_, cols_, rank_bound_);
}

Index VarietyPoint::delta_rank(double delta) const {
  if (!(delta > 0.0))
    throw ArgumentError("delta must be positive");
  return static_cast<Index>(
      std::count_if(sigma_.data(), sigma_.data() + sigma_.size(),
                    [delta](double s) { return s > delta; }));
}

Matrix VarietyPoint::matrix() const {
  if (rank() == 0)
    return Matrix::Zero(rows_, cols_);
  return u_ * sigma_.asDiagonal() * v_.transpose();
}

Matrix TangentDecomposition::d_truncated() const {
  return d_u * d_sigma.asDiagonal() * d_v.transpose();
}

double TangentDecomposition::norm() const {
  return std::sqrt(a.squaredNorm() + b_rows.squaredNorm() +
                   c_cols.squaredNorm() + d_sigma.squaredNorm());
}

TangentProjection project_to_tangent_cone(const VarietyPoint &point,
                                          const Matrix &g) {
  if (g.rows() != point.rows() || g.cols() != point.cols())
    throw ArgumentError("gradient shape does not match the point");
  require_finite(g, "project_to_tangent_cone");

  const Matrix &u = point.u();
  const Matrix &v = point.v();
  const Index budget = point.rank_bound() - point.rank();

  TangentProjection out;
  auto &blk = out.blocks;
  const Matrix utg = u.transpose() * g; // r x n
  const Matrix gv = g * v;              // m x r
  blk.a = utg * v;
  blk.b_rows = utg - blk.a * v.transpose();
  blk.c_cols = gv - u * blk.a;
  // U_perp D V_perp^T = (I - UU^T) G (I - VV^T)
  const Matrix d_full = g - u * utg - blk.c_cols * v.transpose();

  if (budget == 0) {
    blk.d_u.resize(point.rows(), 0);
    blk.d_sigma.resize(0);
    blk.d_v.resize(point.cols(), 0);
    blk.d_residual_norm = d_full.norm();
  } else {
    const auto svd = compute_svd(d_full);
    const Index keep = std::min(budget, svd.numerical_rank);
    blk.d_u = svd.u.leftCols(keep);
    blk.d_sigma = svd.sigma.head(keep);
    blk.d_v = svd.v.leftCols(keep);
    blk.d_residual_norm = tail_norm(svd.sigma, keep);
  }

  out.projected = u * (blk.a * v.transpose() + blk.b_rows) +
                  blk.c_cols * v.transpose() + blk.d_truncated();
  out.norm = blk.norm();
  return out;
}

StationarityReport stationarity_from_projection(const Matrix &gradient,
                                                const TangentProjection &proj) {
  return {proj.norm, gradient.norm(), proj.blocks.d_residual_norm};
}

StationarityReport stationarity_measure(const CostFunction &problem,
                                        const VarietyPoint &point) {
  const Matrix grad = problem.gradient(point.matrix());
  return stationarity_from_projection(grad,
                                      project_to_tangent_cone(point, -grad));
}

bool stationarity_sandwich_check(const VarietyPoint &point,
                                 const StationarityReport &report) {
  const double slack = 1e-9 * report.gradient_norm;
  const double free_rank = static_cast<double>(point.rank_bound() - point.rank());
  const double ambient =
      static_cast<double>(std::min(point.rows(), point.cols()) - point.rank());
  const double lower = std::sqrt(free_rank / ambient) * report.gradient_norm;
  return report.gradient_norm + slack >= report.s_value &&
         report.s_value + slack >= lower;
}

Matrix tangent_curve_gamma(const VarietyPoint &point,
                           const TangentDecomposition &tangent, double t) {
  if (point.rank() == 0)
    throw DomainError("tangent curve is undefined at the zero matrix");
  if (!(t >= 0.0))
    throw ArgumentError("curve parameter must be nonnegative");
  const Matrix &u = point.u();
  const Matrix &v = point.v();
  const Vector inv_sigma = point.sigma().cwiseInverse();

  const Matrix left =
      u + t * (tangent.c_cols + 0.5 * u * tangent.a) * inv_sigma.asDiagonal();
  const Matrix right =
      v + t * (tangent.b_rows.transpose() + 0.5 * v * tangent.a.transpose()) *
              inv_sigma.asDiagonal();
  return left * point.sigma().asDiagonal() * right.transpose() +
         t * tangent.d_truncated();
}

Matrix tangent_curve_quadratic_term(const VarietyPoint &point,
                                    const TangentDecomposition &tangent) {
  if (point.rank() == 0)
    throw DomainError("tangent curve is undefined at the zero matrix");
  const Matrix &u = point.u();
  const Matrix &v = point.v();
  const Matrix left = u * tangent.a + 2.0 * tangent.c_cols;
  const Matrix right = tangent.a * v.transpose() + 2.0 * tangent.b_rows;
  return 0.25 * left * point.sigma().cwiseInverse().asDiagonal() * right;
}

double tangent_line_distance_bound(const VarietyPoint &point,
                                   double tangent_norm) {
  if (point.rank() == 0)
    throw DomainError("distance bound is undefined at the zero matrix");
  if (!(tangent_norm >= 0.0))
    throw ArgumentError("tangent norm must be nonnegative");
  return std::sqrt(static_cast<double>(point.rank())) /
         (2.0 * point.sigma_min()) * tangent_norm * tangent_norm;
}

TightnessInstance appendix_tightness_instance(Index rank_bound, Index rows,
                                              Index cols, double epsilon) {
  if (rank_bound < 1)
    throw ArgumentError("tightness instance needs rank bound >= 1");
  if (rows < rank_bound + 1 || cols < rank_bound + 1)
    throw ArgumentError("tightness instance needs m, n >= r + 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ArgumentError("epsilon must be positive");

  const double s = 1.0 / (4.0 * epsilon);
  const Index r = rank_bound;
  Vector sigma = Vector::Constant(r, 2.0 * s);
  sigma(r - 1) = s;
  Matrix g = Matrix::Zero(rows, cols);
  g(r - 1, r) = s;
  g(r, r - 1) = s;
  auto point = VarietyPoint::from_factors(Matrix::Identity(rows, r), sigma,
                                          Matrix::Identity(cols, r), r);
  return {std::move(point), std::move(g), s};
}

} // namespace lowrank
