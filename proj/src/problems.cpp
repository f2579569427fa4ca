#include "sso/problems.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "sso/error.hpp"

namespace sso {

namespace {

// Curvature of the scalar loss l(z) = (y - sigmoid(z))^2.
struct LinkTerms {
  double loss;
  double first;   // l'(z)
  double second;  // l''(z)
};

LinkTerms link_terms(double z, double y) {
  const double phi = sigmoid(z);
  const double dphi = phi * (1.0 - phi);
  const double d2phi = dphi * (1.0 - 2.0 * phi);
  const double r = phi - y;
  return {r * r, 2.0 * r * dphi, 2.0 * (dphi * dphi + r * d2phi)};
}

// sup |l'| = 2 * 1 * 1/4, sup |l''| <= 2 * (1/16 + 1/(6 sqrt 3)).
constexpr double kMaxFirst = 0.5;
const double kMaxSecond = 2.0 * (1.0 / 16.0 + 1.0 / (6.0 * std::sqrt(3.0)));

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// FiniteSumProblem

Matrix FiniteSumProblem::hessian(std::size_t i, const Vector& x) const {
  require(dim() <= kMaxDenseDim, "dense Hessian requested for dim > 512");
  Matrix out(dim(), dim());
  Vector e = Vector::Zero(dim());
  for (Eigen::Index j = 0; j < dim(); ++j) {
    e[j] = 1.0;
    out.col(j) = hvp(i, x, e);
    e[j] = 0.0;
  }
  return out;
}

void FiniteSumProblem::check_point(const Vector& x) const {
  if (x.size() != dim()) {
    throw ContractViolation("point has dimension " + std::to_string(x.size()) + ", expected " +
                            std::to_string(dim()));
  }
}

void FiniteSumProblem::check_indices(std::span<const std::size_t> indices) const {
  require(!indices.empty(), "empty sample set");
  const std::size_t n = num_samples();
  for (std::size_t i : indices) require(i < n, "sample index out of range");
}

double FiniteSumProblem::mean_value(std::span<const std::size_t> indices, const Vector& x) const {
  check_point(x);
  check_indices(indices);
  return do_mean_value(indices, x);
}

Vector FiniteSumProblem::mean_grad(std::span<const std::size_t> indices, const Vector& x) const {
  check_point(x);
  check_indices(indices);
  return do_mean_grad(indices, x);
}

SymmetricOperator FiniteSumProblem::mean_hessian(std::span<const std::size_t> indices,
                                                 const Vector& x) const {
  check_point(x);
  check_indices(indices);
  return do_mean_hessian(indices, x);
}

double FiniteSumProblem::do_mean_value(std::span<const std::size_t> indices,
                                       const Vector& x) const {
  double sum = 0.0;
  for (std::size_t i : indices) sum += value(i, x);
  return sum / static_cast<double>(indices.size());
}

Vector FiniteSumProblem::do_mean_grad(std::span<const std::size_t> indices,
                                      const Vector& x) const {
  Vector sum = Vector::Zero(dim());
  for (std::size_t i : indices) sum += grad(i, x);
  return sum / static_cast<double>(indices.size());
}

SymmetricOperator FiniteSumProblem::do_mean_hessian(std::span<const std::size_t> indices,
                                                    const Vector& x) const {
  IndexSet idx(indices.begin(), indices.end());
  return SymmetricOperator(dim(), [this, idx = std::move(idx), x](const Vector& v) -> Vector {
    check_point(v);
    Vector sum = Vector::Zero(dim());
    for (std::size_t i : idx) sum += hvp(i, x, v);
    return sum / static_cast<double>(idx.size());
  });
}

IndexSet all_indices(std::size_t n) {
  IndexSet out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

double full_value(const FiniteSumProblem& problem, const Vector& x) {
  const IndexSet all = all_indices(problem.num_samples());
  return problem.mean_value(all, x);
}

Vector full_grad(const FiniteSumProblem& problem, const Vector& x) {
  const IndexSet all = all_indices(problem.num_samples());
  return problem.mean_grad(all, x);
}

Vector full_hvp(const FiniteSumProblem& problem, const Vector& x, const Vector& v) {
  require(v.size() == problem.dim(), "direction has wrong dimension");
  const IndexSet all = all_indices(problem.num_samples());
  return problem.mean_hessian(all, x).apply(v);
}

// ---------------------------------------------------------------------------
// QuadraticProblem

QuadraticProblem::QuadraticProblem(std::vector<Vector> centers) : centers_(std::move(centers)) {
  require(!centers_.empty(), "quadratic problem needs at least one center");
  dim_ = centers_.front().size();
  require(dim_ > 0, "centers must have positive dimension");
  for (const Vector& c : centers_) require(c.size() == dim_, "centers differ in dimension");
}

double QuadraticProblem::value(std::size_t i, const Vector& x) const {
  check_point(x);
  return 0.5 * (x - centers_.at(i)).squaredNorm();
}

Vector QuadraticProblem::grad(std::size_t i, const Vector& x) const {
  check_point(x);
  return x - centers_.at(i);
}

Vector QuadraticProblem::hvp(std::size_t i, const Vector& x, const Vector& v) const {
  check_point(x);
  check_point(v);
  (void)centers_.at(i);
  return v;
}

Matrix QuadraticProblem::hessian(std::size_t i, const Vector& x) const {
  check_point(x);
  (void)centers_.at(i);
  return Matrix::Identity(dim_, dim_);
}

Vector QuadraticProblem::centroid() const {
  Vector sum = Vector::Zero(dim_);
  for (const Vector& c : centers_) sum += c;
  return sum / static_cast<double>(centers_.size());
}

SymmetricOperator QuadraticProblem::do_mean_hessian(std::span<const std::size_t>,
                                                    const Vector&) const {
  return SymmetricOperator::identity(dim_);
}

std::unique_ptr<QuadraticProblem> make_quadratic_problem(std::vector<Vector> centers) {
  return std::make_unique<QuadraticProblem>(std::move(centers));
}

// ---------------------------------------------------------------------------
// NllsLogisticProblem

NllsLogisticProblem::NllsLogisticProblem(SparseRowMatrix features, Vector labels)
    : NllsLogisticProblem(std::make_shared<const SparseRowMatrix>(std::move(features)),
                          std::move(labels)) {}

NllsLogisticProblem::NllsLogisticProblem(std::shared_ptr<const SparseRowMatrix> features,
                                         Vector labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  require(features_ != nullptr, "null feature matrix");
  require(features_->rows() > 0 && features_->cols() > 0, "empty feature matrix");
  require(labels_.size() == features_->rows(), "label count does not match rows");
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    require(labels_[i] == 0.0 || labels_[i] == 1.0, "labels must be 0 or 1");
  }
  require(features_->isCompressed(), "feature matrix must be compressed");
}

double NllsLogisticProblem::row_dot(std::size_t i, const Vector& x) const {
  double z = 0.0;
  for (SparseRowMatrix::InnerIterator it(*features_, static_cast<Eigen::Index>(i)); it; ++it) {
    z += it.value() * x[it.col()];
  }
  return z;
}

double NllsLogisticProblem::value(std::size_t i, const Vector& x) const {
  check_point(x);
  require(i < num_samples(), "sample index out of range");
  const double r = labels_[static_cast<Eigen::Index>(i)] - sigmoid(row_dot(i, x));
  return r * r + 0.5 * x.squaredNorm();
}

Vector NllsLogisticProblem::grad(std::size_t i, const Vector& x) const {
  check_point(x);
  require(i < num_samples(), "sample index out of range");
  const LinkTerms t = link_terms(row_dot(i, x), labels_[static_cast<Eigen::Index>(i)]);
  Vector out = x;
  for (SparseRowMatrix::InnerIterator it(*features_, static_cast<Eigen::Index>(i)); it; ++it) {
    out[it.col()] += t.first * it.value();
  }
  return out;
}

Vector NllsLogisticProblem::hvp(std::size_t i, const Vector& x, const Vector& v) const {
  check_point(x);
  check_point(v);
  require(i < num_samples(), "sample index out of range");
  const LinkTerms t = link_terms(row_dot(i, x), labels_[static_cast<Eigen::Index>(i)]);
  const double scale = t.second * row_dot(i, v);
  Vector out = v;
  for (SparseRowMatrix::InnerIterator it(*features_, static_cast<Eigen::Index>(i)); it; ++it) {
    out[it.col()] += scale * it.value();
  }
  return out;
}

Matrix NllsLogisticProblem::hessian(std::size_t i, const Vector& x) const {
  require(dim() <= kMaxDenseDim, "dense Hessian requested for dim > 512");
  check_point(x);
  require(i < num_samples(), "sample index out of range");
  const LinkTerms t = link_terms(row_dot(i, x), labels_[static_cast<Eigen::Index>(i)]);
  Matrix out = Matrix::Identity(dim(), dim());
  const auto row = static_cast<Eigen::Index>(i);
  for (SparseRowMatrix::InnerIterator a(*features_, row); a; ++a) {
    for (SparseRowMatrix::InnerIterator b(*features_, row); b; ++b) {
      out(a.col(), b.col()) += t.second * a.value() * b.value();
    }
  }
  return out;
}

double NllsLogisticProblem::do_mean_value(std::span<const std::size_t> indices,
                                          const Vector& x) const {
  double sum = 0.0;
  for (std::size_t i : indices) {
    const double r = labels_[static_cast<Eigen::Index>(i)] - sigmoid(row_dot(i, x));
    sum += r * r;
  }
  return sum / static_cast<double>(indices.size()) + 0.5 * x.squaredNorm();
}

Vector NllsLogisticProblem::do_mean_grad(std::span<const std::size_t> indices,
                                         const Vector& x) const {
  Vector acc = Vector::Zero(dim());
  for (std::size_t i : indices) {
    const double c = link_terms(row_dot(i, x), labels_[static_cast<Eigen::Index>(i)]).first;
    for (SparseRowMatrix::InnerIterator it(*features_, static_cast<Eigen::Index>(i)); it; ++it) {
      acc[it.col()] += c * it.value();
    }
  }
  return acc / static_cast<double>(indices.size()) + x;
}

SymmetricOperator NllsLogisticProblem::do_mean_hessian(std::span<const std::size_t> indices,
                                                       const Vector& x) const {
  IndexSet idx(indices.begin(), indices.end());
  std::vector<double> weights;
  weights.reserve(idx.size());
  for (std::size_t i : idx) {
    weights.push_back(link_terms(row_dot(i, x), labels_[static_cast<Eigen::Index>(i)]).second);
  }
  const Eigen::Index d = dim();
  return SymmetricOperator(
      d, [features = features_, idx = std::move(idx), weights = std::move(weights), d](
             const Vector& v) -> Vector {
        require(v.size() == d, "direction has wrong dimension");
        Vector acc = Vector::Zero(d);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const auto row = static_cast<Eigen::Index>(idx[k]);
          double av = 0.0;
          for (SparseRowMatrix::InnerIterator it(*features, row); it; ++it) {
            av += it.value() * v[it.col()];
          }
          const double scale = weights[k] * av;
          for (SparseRowMatrix::InnerIterator it(*features, row); it; ++it) {
            acc[it.col()] += scale * it.value();
          }
        }
        return acc / static_cast<double>(idx.size()) + v;
      });
}

DomainBounds NllsLogisticProblem::domain_bounds(double radius) const {
  require(radius >= 0.0, "radius must be nonnegative");
  double max_row_norm_sq = 0.0;
  for (Eigen::Index i = 0; i < features_->rows(); ++i) {
    max_row_norm_sq = std::max(max_row_norm_sq, features_->row(i).squaredNorm());
  }
  DomainBounds b;
  b.kappa_f = 1.0 + 0.5 * radius * radius;
  b.kappa_grad = kMaxFirst * std::sqrt(max_row_norm_sq) + radius;
  b.kappa_hess = 1.0 + kMaxSecond * max_row_norm_sq;
  return b;
}

double NllsLogisticProblem::classification_error(const SparseRowMatrix& features,
                                                 const Vector& labels, const Vector& x) {
  require(features.cols() == x.size(), "point has wrong dimension");
  require(labels.size() == features.rows() && features.rows() > 0, "labels do not match rows");
  std::size_t wrong = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    double z = 0.0;
    for (SparseRowMatrix::InnerIterator it(features, i); it; ++it) z += it.value() * x[it.col()];
    const double predicted = sigmoid(z) >= 0.5 ? 1.0 : 0.0;
    if (predicted != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(features.rows());
}

}  // namespace sso
