#pragma once

#include <cmath>
#include <vector>

#include "sso/problems.hpp"
#include "sso/rng.hpp"

namespace sso::testing {

// f_i(x) = 0.5 (x1^2 - x2^2) + 0.25 x2^4 + <c_i, x>, with the shifts c_i summing
// to zero: a saddle at the origin and minimisers at (0, +/-1).
class SaddleProblem final : public FiniteSumProblem {
 public:
  explicit SaddleProblem(std::vector<Vector> shifts) : shifts_(std::move(shifts)) {}
  std::size_t num_samples() const override { return shifts_.size(); }
  Eigen::Index dim() const override { return 2; }
  double value(std::size_t i, const Vector& x) const override {
    return 0.5 * (x(0) * x(0) - x(1) * x(1)) + 0.25 * std::pow(x(1), 4) + shifts_[i].dot(x);
  }
  Vector grad(std::size_t i, const Vector& x) const override {
    Vector g(2);
    g << x(0), -x(1) + std::pow(x(1), 3);
    return g + shifts_[i];
  }
  Vector hvp(std::size_t, const Vector& x, const Vector& v) const override {
    Vector out(2);
    out << v(0), (-1.0 + 3.0 * x(1) * x(1)) * v(1);
    return out;
  }

 private:
  std::vector<Vector> shifts_;
};

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Vector random_vector(Rng& rng, Eigen::Index d, double scale = 1.0) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

}  // namespace sso::testing
