#include "lowrank/linalg.hpp"

#include "lowrank/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace lowrank {

Matrix SvdFactorization::reconstruct() const {
  return u * sigma.asDiagonal() * v.transpose();
}

void RankParams::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ArgumentError("delta must be positive and finite");
  if (!(rank_rel_tol > 0.0) || !std::isfinite(rank_rel_tol))
    throw ArgumentError("rank_rel_tol must be positive and finite");
}

double rank_threshold(double sigma_max, Index rows, Index cols,
                      double rank_rel_tol) {
  return rank_rel_tol * sigma_max * static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

void require_finite(const Eigen::Ref<const Matrix> &x, const char *what) {
  if (x.rows() <= 0 || x.cols() <= 0)
    throw ArgumentError(std::string(what) + ": matrix must be non-empty");
  if (!x.allFinite())
    throw ArgumentError(std::string(what) + ": matrix has non-finite entries");
}

SvdFactorization compute_svd(const Eigen::Ref<const Matrix> &x,
                             double rank_rel_tol) {
  require_finite(x, "compute_svd");
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("SVD failed to converge");

  SvdFactorization out;
  out.u = svd.matrixU();
  out.sigma = svd.singularValues();
  out.v = svd.matrixV();
  if (!out.u.allFinite() || !out.v.allFinite() || !out.sigma.allFinite())
    throw NumericalError("SVD produced non-finite factors");

  const double smax = out.sigma.size() > 0 ? out.sigma(0) : 0.0;
  out.threshold = rank_threshold(smax, x.rows(), x.cols(), rank_rel_tol);
  out.numerical_rank = 0;
  for (Index j = 0; j < out.sigma.size(); ++j)
    if (out.sigma(j) > out.threshold)
      ++out.numerical_rank;
  return out;
}

Index numerical_rank(const Eigen::Ref<const Matrix> &x, double rank_rel_tol) {
  return compute_svd(x, rank_rel_tol).numerical_rank;
}

Index delta_rank(const SvdFactorization &svd, double delta) {
  if (!(delta > 0.0))
    throw ArgumentError("delta_rank: delta must be positive");
  Index count = 0;
  for (Index j = 0; j < svd.numerical_rank; ++j)
    if (svd.sigma(j) > delta)
      ++count;
  return count;
}

Index delta_rank(const Eigen::Ref<const Matrix> &x, double delta,
                 double rank_rel_tol) {
  if (!(delta > 0.0))
    throw ArgumentError("delta_rank: delta must be positive");
  return delta_rank(compute_svd(x, rank_rel_tol), delta);
}

double tail_norm(const Vector &sigma, Index target) {
  if (target >= sigma.size())
    return 0.0;
  return sigma.tail(sigma.size() - target).norm();
}

Truncation truncate_to_rank(const SvdFactorization &svd, Index target) {
  const Index k = svd.sigma.size();
  if (target < 0 || target > k)
    throw ArgumentError("truncate_to_rank: target " + std::to_string(target) +
                        " outside [0, " + std::to_string(k) + "]");
  Truncation out;
  out.matrix = svd.u.leftCols(target) *
               svd.sigma.head(target).asDiagonal() *
               svd.v.leftCols(target).transpose();
  out.distance = tail_norm(svd.sigma, target);
  return out;
}

Truncation truncate_to_rank(const Eigen::Ref<const Matrix> &x, Index target) {
  const Index k = std::min(x.rows(), x.cols());
  if (target < 0 || target > k)
    throw ArgumentError("truncate_to_rank: target " + std::to_string(target) +
                        " outside [0, " + std::to_string(k) + "]");
  const auto svd = compute_svd(x);
  // Already in the set: return x itself rather than its reconstruction.
  if (svd.numerical_rank <= target)
    return {Matrix(x), tail_norm(svd.sigma, target)};
  return truncate_to_rank(svd, target);
}

double distance_to_bounded_rank(const Eigen::Ref<const Matrix> &x,
                                Index target) {
  const Index k = std::min(x.rows(), x.cols());
  if (target < 0 || target > k)
    throw ArgumentError("distance_to_bounded_rank: target out of range");
  if (target == k)
    return 0.0;
  return tail_norm(compute_svd(x).sigma, target);
}

Matrix random_gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      out(i, j) = normal(rng);
  return out;
}

} // namespace lowrank
