#pragma once

#include <Eigen/SparseCore>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sso/linear_operator.hpp"

namespace sso {

using IndexSet = std::vector<std::size_t>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

/// Objective of the form f(x) = (1/n) sum_i f_i(x).
///
/// Per-sample oracles are deterministic in (i, x). The mean_* entry points
/// reduce over the given indices in the order they are listed; callers pass
/// ascending index sets so results are bitwise reproducible.
class FiniteSumProblem {
 public:
  virtual ~FiniteSumProblem() = default;

  virtual std::size_t num_samples() const = 0;
  virtual Eigen::Index dim() const = 0;

  virtual double value(std::size_t i, const Vector& x) const = 0;
  virtual Vector grad(std::size_t i, const Vector& x) const = 0;
  virtual Vector hvp(std::size_t i, const Vector& x, const Vector& v) const = 0;

  /// Dense per-sample Hessian. Only offered for dim() <= kMaxDenseDim.
  virtual Matrix hessian(std::size_t i, const Vector& x) const;

  double mean_value(std::span<const std::size_t> indices, const Vector& x) const;
  Vector mean_grad(std::span<const std::size_t> indices, const Vector& x) const;
  /// Subsampled Hessian at x as an operator. The operator keeps whatever it
  /// needs alive, so it may outlive the call but not the problem's data.
  SymmetricOperator mean_hessian(std::span<const std::size_t> indices, const Vector& x) const;

  static constexpr Eigen::Index kMaxDenseDim = 512;

 protected:
  virtual double do_mean_value(std::span<const std::size_t> indices, const Vector& x) const;
  virtual Vector do_mean_grad(std::span<const std::size_t> indices, const Vector& x) const;
  virtual SymmetricOperator do_mean_hessian(std::span<const std::size_t> indices,
                                            const Vector& x) const;

  void check_point(const Vector& x) const;
  void check_indices(std::span<const std::size_t> indices) const;
};

IndexSet all_indices(std::size_t n);

double full_value(const FiniteSumProblem& problem, const Vector& x);
Vector full_grad(const FiniteSumProblem& problem, const Vector& x);
Vector full_hvp(const FiniteSumProblem& problem, const Vector& x, const Vector& v);

/// f_i(x) = 0.5 * ||x - c_i||^2. Identity Hessian, minimiser at the centroid.
class QuadraticProblem final : public FiniteSumProblem {
 public:
  explicit QuadraticProblem(std::vector<Vector> centers);

  std::size_t num_samples() const override { return centers_.size(); }
  Eigen::Index dim() const override { return dim_; }
  double value(std::size_t i, const Vector& x) const override;
  Vector grad(std::size_t i, const Vector& x) const override;
  Vector hvp(std::size_t i, const Vector& x, const Vector& v) const override;
  Matrix hessian(std::size_t i, const Vector& x) const override;

  Vector centroid() const;
  const std::vector<Vector>& centers() const { return centers_; }

 protected:
  SymmetricOperator do_mean_hessian(std::span<const std::size_t> indices,
                                    const Vector& x) const override;

 private:
  std::vector<Vector> centers_;
  Eigen::Index dim_;
};

std::unique_ptr<QuadraticProblem> make_quadratic_problem(std::vector<Vector> centers);

/// Per-sample bounds valid on the ball ||x|| <= radius.
struct DomainBounds {
  double kappa_f = 0.0;     // max |f_i|
  double kappa_grad = 0.0;  // max ||grad f_i||
  double kappa_hess = 0.0;  // max ||hess f_i||
};

double sigmoid(double z);

/// Nonlinear least squares with a logistic link:
///   f_i(x) = (y_i - sigmoid(<a_i, x>))^2 + 0.5 * ||x||^2,  y_i in {0, 1}.
/// The ridge term sits inside every f_i so subsampled means stay unbiased.
class NllsLogisticProblem final : public FiniteSumProblem {
 public:
  NllsLogisticProblem(SparseRowMatrix features, Vector labels);
  NllsLogisticProblem(std::shared_ptr<const SparseRowMatrix> features, Vector labels);

  std::size_t num_samples() const override { return static_cast<std::size_t>(features_->rows()); }
  Eigen::Index dim() const override { return features_->cols(); }
  double value(std::size_t i, const Vector& x) const override;
  Vector grad(std::size_t i, const Vector& x) const override;
  Vector hvp(std::size_t i, const Vector& x, const Vector& v) const override;
  Matrix hessian(std::size_t i, const Vector& x) const override;

  /// Bounds on ||x|| <= radius: |f_i| <= 1 + r^2/2, ||grad|| <= |l'|max ||a_i|| + r,
  /// ||hess|| <= 1 + |l''|max ||a_i||^2. They do not hold globally.
  DomainBounds domain_bounds(double radius) const;

  /// Fraction of rows misclassified by the rule sigmoid(<a, x>) >= 0.5 -> 1.
  static double classification_error(const SparseRowMatrix& features, const Vector& labels,
                                     const Vector& x);

  const SparseRowMatrix& features() const { return *features_; }
  const Vector& labels() const { return labels_; }

 protected:
  double do_mean_value(std::span<const std::size_t> indices, const Vector& x) const override;
  Vector do_mean_grad(std::span<const std::size_t> indices, const Vector& x) const override;
  SymmetricOperator do_mean_hessian(std::span<const std::size_t> indices,
                                    const Vector& x) const override;

 private:
  double row_dot(std::size_t i, const Vector& x) const;

  std::shared_ptr<const SparseRowMatrix> features_;
  Vector labels_;
};

}  // namespace sso
