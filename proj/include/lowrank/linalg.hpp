#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace lowrank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thin SVD X = U diag(sigma) V^T with k = min(m, n) triplets, sigma
/// nonincreasing. `numerical_rank` counts the sigma strictly above the
/// rank-detection threshold.
struct SvdFactorization {
  Matrix u;
  Vector sigma;
  Matrix v;
  Index numerical_rank = 0;
  double threshold = 0.0;

  Matrix reconstruct() const;
};

struct RankParams {
  double delta = 1e-3;
  double rank_rel_tol = 1.0;

  void validate() const;
};

struct Truncation {
  Matrix matrix;
  double distance = 0.0;
};

/// tau = rank_rel_tol * sigma_max * max(m, n) * eps.
double rank_threshold(double sigma_max, Index rows, Index cols,
                      double rank_rel_tol = 1.0);

/// Throws ArgumentError on empty matrices or non-finite entries.
void require_finite(const Eigen::Ref<const Matrix> &x, const char *what);

SvdFactorization compute_svd(const Eigen::Ref<const Matrix> &x,
                             double rank_rel_tol = 1.0);

Index numerical_rank(const Eigen::Ref<const Matrix> &x,
                     double rank_rel_tol = 1.0);

/// Number of singular values strictly greater than delta, capped by the
/// numerical rank. Zero for the zero matrix and whenever no singular value
/// exceeds delta.
Index delta_rank(const Eigen::Ref<const Matrix> &x, double delta,
                 double rank_rel_tol = 1.0);
Index delta_rank(const SvdFactorization &svd, double delta);

/// Eckart-Young: keeps the leading `target` singular triplets. Ties at
/// sigma_target == sigma_{target+1} keep the triplets in SVD order.
Truncation truncate_to_rank(const Eigen::Ref<const Matrix> &x, Index target);
Truncation truncate_to_rank(const SvdFactorization &svd, Index target);

/// sqrt(sum_{j > target} sigma_j^2).
double distance_to_bounded_rank(const Eigen::Ref<const Matrix> &x,
                                Index target);
double tail_norm(const Vector &sigma, Index target);

Matrix random_gaussian(Index rows, Index cols, std::uint64_t seed);

} // namespace lowrank
