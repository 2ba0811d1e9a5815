#pragma once

#include "lowrank/variety.hpp"

#include <random>

namespace lowrank {

/// Seeded generators for randomized property checks.
class Sampler {
public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double normal() { return normal_(rng_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  Index integer(Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng_);
  }

  Matrix gaussian(Index rows, Index cols);

  /// rows x cols with orthonormal columns (Haar-distributed via QR).
  Matrix orthonormal(Index rows, Index cols);

  /// Exact-rank point with singular values drawn from [lo, hi].
  VarietyPoint point(Index rows, Index cols, Index rank_bound, Index rank,
                     double lo = 0.5, double hi = 3.0);

  /// A random element of the tangent cone at `point`: random A, B, C blocks
  /// and a rank-(r - rank X) D block, assembled in the point's SVD frame.
  Matrix tangent_vector(const VarietyPoint &point);

  std::mt19937_64 &engine() { return rng_; }

private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace lowrank
