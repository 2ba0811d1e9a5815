#include "lowrank/sampling.hpp"

#include <algorithm>

namespace lowrank {

Matrix Sampler::gaussian(Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      out(i, j) = normal();
  return out;
}

Matrix Sampler::orthonormal(Index rows, Index cols) {
  if (cols == 0)
    return Matrix(rows, 0);
  Eigen::HouseholderQR<Matrix> qr(gaussian(rows, cols));
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  // Sign convention so that the distribution is Haar.
  for (Index j = 0; j < cols; ++j)
    if (qr.matrixQR()(j, j) < 0.0)
      q.col(j) *= -1.0;
  return q;
}

VarietyPoint Sampler::point(Index rows, Index cols, Index rank_bound,
                            Index rank, double lo, double hi) {
  if (rank == 0)
    return VarietyPoint(rows, cols, rank_bound);
  Vector sigma(rank);
  for (Index j = 0; j < rank; ++j)
    sigma(j) = uniform(lo, hi);
  std::sort(sigma.data(), sigma.data() + rank, std::greater<>());
  return VarietyPoint::from_factors(orthonormal(rows, rank), sigma,
                                    orthonormal(cols, rank), rank_bound);
}

Matrix Sampler::tangent_vector(const VarietyPoint &point) {
  const Index m = point.rows();
  const Index n = point.cols();
  const Index k = point.rank();
  const Index budget = point.rank_bound() - k;
  const Matrix &u = point.u();
  const Matrix &v = point.v();
  const Matrix pu = Matrix::Identity(m, m) - u * u.transpose();
  const Matrix pv = Matrix::Identity(n, n) - v * v.transpose();

  Matrix w = u * gaussian(k, k) * v.transpose() +
             u * gaussian(k, n) * pv + pu * gaussian(m, k) * v.transpose();
  if (budget > 0)
    w += pu * gaussian(m, budget) * gaussian(budget, n) * pv;
  return w;
}

} // namespace lowrank
