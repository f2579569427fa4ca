#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>

namespace sso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A symmetric linear map v -> B v, known only through its action. Every inner
/// solver is written against this type so the same code runs on dense test
/// matrices and on subsampled Hessian-vector products.
class SymmetricOperator {
 public:
  using Apply = std::function<Vector(const Vector&)>;

  SymmetricOperator() = default;
  SymmetricOperator(Eigen::Index dim, Apply apply) : dim_(dim), apply_(std::move(apply)) {}

  static SymmetricOperator from_dense(Matrix m) {
    const Eigen::Index dim = m.rows();
    return SymmetricOperator(dim, [m = std::move(m)](const Vector& v) -> Vector { return m * v; });
  }

  static SymmetricOperator identity(Eigen::Index dim) {
    return SymmetricOperator(dim, [](const Vector& v) -> Vector { return v; });
  }

  Eigen::Index dim() const { return dim_; }
  Vector apply(const Vector& v) const { return apply_(v); }
  Vector operator()(const Vector& v) const { return apply_(v); }

  /// Materialises the operator column by column (d applications).
  Matrix to_dense() const {
    Matrix out(dim_, dim_);
    Vector e = Vector::Zero(dim_);
    for (Eigen::Index j = 0; j < dim_; ++j) {
      e[j] = 1.0;
      out.col(j) = apply_(e);
      e[j] = 0.0;
    }
    return out;
  }

 private:
  Eigen::Index dim_ = 0;
  Apply apply_;
};

}  // namespace sso
