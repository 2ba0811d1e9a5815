#pragma once

#include "lowrank/linalg.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace lowrank {

/// Smooth cost f : R^{m x n} -> R with an analytic gradient.
class CostFunction {
public:
  CostFunction(Index rows, Index cols);
  virtual ~CostFunction() = default;

  virtual double eval(const Matrix &x) const = 0;
  virtual Matrix gradient(const Matrix &x) const = 0;

  /// Global Lipschitz constant of the gradient, when one is known.
  virtual std::optional<double> lipschitz_hint() const { return std::nullopt; }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

protected:
  void check_shape(const Matrix &x) const;

private:
  Index rows_;
  Index cols_;
};

/// f(X) = 1/2 ||X - A||^2.
class LowRankApproxProblem final : public CostFunction {
public:
  explicit LowRankApproxProblem(Matrix target);

  double eval(const Matrix &x) const override;
  Matrix gradient(const Matrix &x) const override;
  std::optional<double> lipschitz_hint() const override { return 1.0; }

  const Matrix &target() const { return target_; }

private:
  Matrix target_;
};

/// f(X) = 1/2 ||mask .* (X - A)||^2 with a dense 0/1 mask.
class MatrixCompletionProblem final : public CostFunction {
public:
  MatrixCompletionProblem(Matrix target, Matrix mask);

  double eval(const Matrix &x) const override;
  Matrix gradient(const Matrix &x) const override;
  std::optional<double> lipschitz_hint() const override { return 1.0; }

  const Matrix &target() const { return target_; }
  const Matrix &mask() const { return mask_; }

private:
  Matrix target_;
  Matrix mask_;
};

struct MonomialFactor {
  Index row = 0;
  Index col = 0;
  int power = 1;
};

struct PolynomialTerm {
  std::vector<MonomialFactor> monomial;
  double coeff = 0.0;
};

/// Polynomial in the entries of X, total degree at most 4. Repeated
/// (row, col) factors inside a monomial are merged on construction.
class PolynomialProblem final : public CostFunction {
public:
  static constexpr int kMaxDegree = 4;

  PolynomialProblem(Index rows, Index cols, std::vector<PolynomialTerm> terms);

  double eval(const Matrix &x) const override;
  Matrix gradient(const Matrix &x) const override;

  const std::vector<PolynomialTerm> &terms() const { return terms_; }

private:
  std::vector<PolynomialTerm> terms_;
};

/// Max |central difference - <grad f(x), d>| over the first min(mn, 10)
/// coordinate directions plus seeded random unit directions, at least 20
/// directions in total.
double finite_difference_check(const CostFunction &problem, const Matrix &x,
                               double h, std::uint64_t seed = 0x5eed);

/// Input bundle for comparing P2GD and P2GDR on a user-supplied polynomial.
/// Validates feasibility of x0 only.
struct ApocalypseBundle {
  std::shared_ptr<const PolynomialProblem> problem;
  Matrix x0;
  Index rank_bound = 0;
};

ApocalypseBundle
make_apocalypse_candidate(std::shared_ptr<const PolynomialProblem> problem,
                          Matrix x0, Index rank_bound);

} // namespace lowrank
