#include "lowrank/problems.hpp"

#include "lowrank/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>

namespace lowrank {

CostFunction::CostFunction(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0)
    throw ArgumentError("cost function shape must be positive");
}

void CostFunction::check_shape(const Matrix &x) const {
  if (x.rows() != rows_ || x.cols() != cols_)
    throw ArgumentError("matrix is " + std::to_string(x.rows()) + "x" +
                        std::to_string(x.cols()) + ", problem expects " +
                        std::to_string(rows_) + "x" + std::to_string(cols_));
}

LowRankApproxProblem::LowRankApproxProblem(Matrix target)
    : CostFunction(target.rows(), target.cols()), target_(std::move(target)) {
  require_finite(target_, "LowRankApproxProblem target");
}

double LowRankApproxProblem::eval(const Matrix &x) const {
  check_shape(x);
  return 0.5 * (x - target_).squaredNorm();
}

Matrix LowRankApproxProblem::gradient(const Matrix &x) const {
  check_shape(x);
  return x - target_;
}

MatrixCompletionProblem::MatrixCompletionProblem(Matrix target, Matrix mask)
    : CostFunction(target.rows(), target.cols()), target_(std::move(target)),
      mask_(std::move(mask)) {
  require_finite(target_, "MatrixCompletionProblem target");
  if (mask_.rows() != target_.rows() || mask_.cols() != target_.cols())
    throw ArgumentError("mask shape does not match target");
  for (Index i = 0; i < mask_.size(); ++i) {
    const double w = mask_.data()[i];
    if (w != 0.0 && w != 1.0)
      throw ArgumentError("mask entries must be 0 or 1");
  }
}

double MatrixCompletionProblem::eval(const Matrix &x) const {
  check_shape(x);
  return 0.5 * mask_.cwiseProduct(x - target_).squaredNorm();
}

Matrix MatrixCompletionProblem::gradient(const Matrix &x) const {
  check_shape(x);
  return mask_.cwiseProduct(x - target_);
}

PolynomialProblem::PolynomialProblem(Index rows, Index cols,
                                     std::vector<PolynomialTerm> terms)
    : CostFunction(rows, cols) {
  for (auto &term : terms) {
    if (!std::isfinite(term.coeff))
      throw ArgumentError("polynomial coefficient must be finite");
    std::map<std::pair<Index, Index>, int> merged;
    int degree = 0;
    for (const auto &f : term.monomial) {
      if (f.row < 0 || f.row >= rows || f.col < 0 || f.col >= cols)
        throw ArgumentError("monomial factor index out of range");
      if (f.power < 0)
        throw ArgumentError("monomial power must be nonnegative");
      degree += f.power;
      if (f.power > 0)
        merged[{f.row, f.col}] += f.power;
    }
    if (degree > kMaxDegree)
      throw ArgumentError("polynomial degree exceeds " +
                          std::to_string(kMaxDegree));
    PolynomialTerm clean;
    clean.coeff = term.coeff;
    for (const auto &[idx, power] : merged)
      clean.monomial.push_back({idx.first, idx.second, power});
    terms_.push_back(std::move(clean));
  }
}

double PolynomialProblem::eval(const Matrix &x) const {
  check_shape(x);
  double total = 0.0;
  for (const auto &term : terms_) {
    double value = term.coeff;
    for (const auto &f : term.monomial)
      value *= std::pow(x(f.row, f.col), f.power);
    total += value;
  }
  return total;
}

Matrix PolynomialProblem::gradient(const Matrix &x) const {
  check_shape(x);
  Matrix grad = Matrix::Zero(rows(), cols());
  for (const auto &term : terms_) {
    const auto &mono = term.monomial;
    for (std::size_t k = 0; k < mono.size(); ++k) {
      double partial = term.coeff * mono[k].power *
                       std::pow(x(mono[k].row, mono[k].col), mono[k].power - 1);
      for (std::size_t l = 0; l < mono.size(); ++l)
        if (l != k)
          partial *= std::pow(x(mono[l].row, mono[l].col), mono[l].power);
      grad(mono[k].row, mono[k].col) += partial;
    }
  }
  return grad;
}

double finite_difference_check(const CostFunction &problem, const Matrix &x,
                               double h, std::uint64_t seed) {
  if (!(h > 0.0))
    throw ArgumentError("finite_difference_check: h must be positive");
  const Index m = problem.rows();
  const Index n = problem.cols();
  const Matrix grad = problem.gradient(x);

  std::vector<Matrix> directions;
  const Index basis = std::min<Index>(m * n, 10);
  for (Index k = 0; k < basis; ++k) {
    Matrix e = Matrix::Zero(m, n);
    e(k % m, k / m) = 1.0;
    directions.push_back(std::move(e));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (directions.size() < 20) {
    Matrix d(m, n);
    for (Index i = 0; i < d.size(); ++i)
      d.data()[i] = normal(rng);
    directions.push_back(d / d.norm());
  }

  double worst = 0.0;
  for (const auto &d : directions) {
    const double fd =
        (problem.eval(x + h * d) - problem.eval(x - h * d)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - (grad.array() * d.array()).sum()));
  }
  return worst;
}

ApocalypseBundle
make_apocalypse_candidate(std::shared_ptr<const PolynomialProblem> problem,
                          Matrix x0, Index rank_bound) {
  if (!problem)
    throw ArgumentError("apocalypse candidate needs a problem");
  if (x0.rows() != problem->rows() || x0.cols() != problem->cols())
    throw ArgumentError("x0 shape does not match problem");
  if (rank_bound < 0 || rank_bound >= std::min(x0.rows(), x0.cols()))
    throw ArgumentError("rank bound must lie in [0, min(m, n))");
  if (numerical_rank(x0) > rank_bound)
    throw InfeasiblePointError("x0 has rank above the bound");
  return {std::move(problem), std::move(x0), rank_bound};
}

} // namespace lowrank
