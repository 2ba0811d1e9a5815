#include "lowrank/errors.hpp"
#include "lowrank/linalg.hpp"
#include "lowrank/sampling.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace lowrank;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d)
    v(i++) = x;
  return v.asDiagonal();
}

// Independent route to the singular values: eigenvalues of X^T X (or X X^T).
Vector oracle_singular_values(const Matrix &x) {
  const Matrix gram = x.rows() >= x.cols() ? Matrix(x.transpose() * x)
                                           : Matrix(x * x.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  Vector ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return ev.reverse();
}

} // namespace

TEST_CASE("compute_svd on fixed inputs") {
  const auto s = compute_svd(diag({3, 2, 1}));
  CHECK(s.sigma(0) == doctest::Approx(3));
  CHECK(s.sigma(1) == doctest::Approx(2));
  CHECK(s.sigma(2) == doctest::Approx(1));
  CHECK(s.numerical_rank == 3);

  const auto z = compute_svd(Matrix::Zero(3, 3));
  CHECK(z.sigma.isZero());
  CHECK(z.numerical_rank == 0);
}

TEST_CASE("compute_svd reconstructs a random 8x5 matrix") {
  const Matrix x = random_gaussian(8, 5, 11);
  const auto s = compute_svd(x);
  CHECK(s.sigma.size() == 5);
  CHECK((s.reconstruct() - x).norm() / x.norm() <= 1e-12);
  CHECK((s.u.transpose() * s.u - Matrix::Identity(5, 5)).norm() <= 1e-12);
  CHECK((s.v.transpose() * s.v - Matrix::Identity(5, 5)).norm() <= 1e-12);
  CHECK((s.sigma - oracle_singular_values(x)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("compute_svd rejects non-finite input") {
  Matrix x = Matrix::Ones(2, 2);
  x(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(compute_svd(x), ArgumentError);
}

TEST_CASE("rank threshold follows the scale-invariant rule") {
  const double eps = std::numeric_limits<double>::epsilon();
  CHECK(rank_threshold(2.0, 3, 5) == doctest::Approx(2.0 * 5 * eps));
  // 1e-18 sits below tau = 3 * eps for diag(1, 1e-18, 0).
  CHECK(numerical_rank(diag({1, 1e-18, 0})) == 1);
  CHECK(numerical_rank(diag({1, 1e-10, 0})) == 2);
}

TEST_CASE("delta_rank") {
  CHECK(delta_rank(Matrix::Zero(3, 3), 0.1) == 0);
  CHECK(delta_rank(diag({3, 1, 0.5}), 1.0) == 1);
  CHECK(delta_rank(diag({3, 1, 0.5}), 0.4) == 3);
  // Nonzero matrix with every singular value below delta.
  CHECK(delta_rank(diag({0.2, 0.1, 0}), 1.0) == 0);
  // Never exceeds the numerical rank, even for a tiny delta.
  CHECK(delta_rank(diag({1, 1e-18, 0}), 1e-30) == 1);
  CHECK_THROWS_AS(delta_rank(diag({1, 1}), 0.0), ArgumentError);
}

TEST_CASE("truncate_to_rank") {
  SUBCASE("diagonal") {
    const auto t = truncate_to_rank(diag({3, 2, 1}), 2);
    CHECK((t.matrix - diag({3, 2, 0})).norm() <= 1e-14);
    CHECK(t.distance == doctest::Approx(1.0));
  }
  SUBCASE("already low rank returns the input") {
    const Matrix x = diag({2, 1, 0});
    const auto t = truncate_to_rank(x, 2);
    CHECK(t.matrix == x);
    CHECK(t.distance <= 1e-15);
  }
  SUBCASE("random 10x7 against the tail oracle") {
    const Matrix x = random_gaussian(10, 7, 3);
    const Vector sv = oracle_singular_values(x);
    const double oracle = sv.tail(4).norm();
    const auto t = truncate_to_rank(x, 3);
    CHECK(std::abs(t.distance - oracle) <= 1e-10);
    CHECK(std::abs((x - t.matrix).norm() - oracle) <= 1e-10);
    CHECK(numerical_rank(t.matrix) == 3);
  }
  SUBCASE("ties keep the triplets in SVD order") {
    const auto t = truncate_to_rank(diag({2, 1, 1}), 2);
    CHECK(t.distance == doctest::Approx(1.0));
    CHECK(numerical_rank(t.matrix) == 2);
  }
  CHECK_THROWS_AS(truncate_to_rank(diag({1, 1}), 3), ArgumentError);
  CHECK_THROWS_AS(truncate_to_rank(diag({1, 1}), -1), ArgumentError);
}

TEST_CASE("distance_to_bounded_rank") {
  CHECK(distance_to_bounded_rank(diag({3, 2, 1}), 1) ==
        doctest::Approx(std::sqrt(5.0)));
  CHECK(distance_to_bounded_rank(random_gaussian(4, 6, 1), 4) == 0.0);
  CHECK(distance_to_bounded_rank(diag({3, 0, 0}), 1) <= 1e-15);

  // X + G for the tightness construction with r = 2, m = n = 3, sigma = 1.
  Matrix xg(3, 3);
  xg << 2, 0, 0, 0, 1, 1, 0, 1, 0;
  CHECK(std::abs(distance_to_bounded_rank(xg, 2) -
                 (std::sqrt(5.0) - 1.0) / 2.0) <= 1e-12);
  CHECK_THROWS_AS(distance_to_bounded_rank(xg, 4), ArgumentError);
}

TEST_CASE("singular values are 1-Lipschitz in Frobenius norm") {
  Sampler s(7);
  for (int k = 0; k < 200; ++k) {
    const Index m = s.integer(1, 9), n = s.integer(1, 9);
    const Matrix x = s.gaussian(m, n);
    const Matrix y = x + s.uniform(0, 2) * s.gaussian(m, n);
    const Vector gap =
        (compute_svd(x).sigma - compute_svd(y).sigma).cwiseAbs();
    REQUIRE(gap.maxCoeff() <= (x - y).norm() + 1e-10);
  }
}

TEST_CASE("projection norm identity and delta_rank monotonicity") {
  Sampler s(8);
  for (int k = 0; k < 200; ++k) {
    const Index m = s.integer(1, 12), n = s.integer(1, 12);
    const Matrix x = s.gaussian(m, n);
    const Index target = s.integer(0, std::min(m, n));
    const auto t = truncate_to_rank(x, target);
    REQUIRE(std::abs(t.matrix.squaredNorm() + t.distance * t.distance -
                     x.squaredNorm()) <= 1e-9 * x.squaredNorm());

    const double d1 = s.uniform(0.01, 2), d2 = s.uniform(0.01, 2);
    REQUIRE(delta_rank(x, std::min(d1, d2)) >= delta_rank(x, std::max(d1, d2)));
  }
}

TEST_CASE("local delta-rank near an exact-rank matrix") {
  Sampler s(9);
  for (int k = 0; k < 200; ++k) {
    const Index m = s.integer(2, 8), n = s.integer(2, 8);
    const Index rank = s.integer(1, std::min(m, n));
    Vector sigma = Vector::LinSpaced(rank, 2.0, 0.5);
    const Matrix x = s.orthonormal(m, rank) * sigma.asDiagonal() *
                     s.orthonormal(n, rank).transpose();
    const double delta = s.uniform(0.05, 1.5);
    const double eps = s.uniform(0.01, 0.99) * std::min(0.5, delta);
    const Matrix e = s.gaussian(m, n);
    const Matrix y = x + eps * s.uniform(0, 1) * e / e.norm();

    REQUIRE(delta_rank(y, delta) <= rank);
    REQUIRE(rank <= numerical_rank(y));
    REQUIRE((truncate_to_rank(y, rank).matrix - x).norm() <= 2.0 * eps);
  }
}
