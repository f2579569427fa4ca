#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sso/models.hpp"

using namespace sso;
using sso::testing::vec;

namespace {

ModelState tr_model(double h, Vector g, SymmetricOperator b, double radius, double eps_h = 0.0) {
  ModelState m;
  m.h = h;
  m.g = std::move(g);
  m.b = std::move(b);
  m.kind = ModelKind::trust_region;
  m.radius_or_sigma = radius;
  m.eps_h = eps_h;
  return m;
}

ModelState cubic_model(double h, Vector g, SymmetricOperator b, double sigma, double eps_h = 0.0) {
  ModelState m = tr_model(h, std::move(g), std::move(b), sigma, eps_h);
  m.kind = ModelKind::cubic;
  return m;
}

}  // namespace

TEST_CASE("eval_m") {
  const ModelState m = tr_model(0.0, vec({1, 0}), SymmetricOperator::identity(2), 1.0);
  CHECK(eval_m(m, vec({-1, 0})) == doctest::Approx(-0.5));
  const ModelState m2 = tr_model(3.5, vec({1, 0}), SymmetricOperator::identity(2), 1.0);
  CHECK(eval_m(m2, Vector::Zero(2)) == 3.5);
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vector s = testing::random_vector(rng, 2);
    const double lhs = eval_m(m2, Vector::Zero(2)) - eval_m(m2, s);
    CHECK(std::abs(lhs - quadratic_decrease(m2.g, s, s)) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("eval_p") {
  const ModelState p = cubic_model(0.0, vec({1}), SymmetricOperator::from_dense(Matrix::Zero(1, 1)), 1.0);
  CHECK(eval_p(p, vec({-1})) == doctest::Approx(-2.0 / 3.0));
  CHECK(eval_p(p, vec({0})) == 0.0);
  const ModelState p0 = cubic_model(1.0, vec({1, 2}), SymmetricOperator::identity(2), 0.0);
  CHECK(eval_p(p0, vec({0.3, -1})) == doctest::Approx(eval_m(p0, vec({0.3, -1}))));
  Rng rng(2);
  const ModelState p2 = cubic_model(1.0, vec({1, 2}), SymmetricOperator::identity(2), 2.5);
  for (int t = 0; t < 50; ++t) {
    const Vector s = testing::random_vector(rng, 2);
    const double diff = eval_p(p2, s) - eval_m(p2, s);
    CHECK(diff >= 0.0);
    CHECK(diff == doctest::Approx(2.5 / 3.0 * std::pow(s.norm(), 3)));
  }
  const ModelState m = tr_model(0.0, vec({1}), SymmetricOperator::identity(1), 1.0);
  CHECK_THROWS(eval_p(m, vec({1})));
}

TEST_CASE("str ratio substitution") {
  const RatioReport r = ratio_str(1.0, 1.0, 0.1, 1.0, 0.05);
  CHECK(r.rho_tilde == doctest::Approx(0.9));
  CHECK(r.rho_hat == doctest::Approx(0.8));
  CHECK_FALSE(r.degenerate);
  const RatioReport z = ratio_str(1.0, 1.0, 0.1, 1.0, 0.0);
  CHECK(z.rho_hat == z.rho_tilde);
}

TEST_CASE("sarc ratio in both correction modes") {
  const RatioReport r = ratio_sarc(2.0, 2.0, 0.2, 1.0, 0.1, 1.0, SarcCorrection::sigma);
  CHECK(r.rho_tilde == doctest::Approx(0.9));
  CHECK(r.rho_hat == doctest::Approx(0.8));
  const RatioReport s = ratio_sarc(2.0, 2.0, 0.2, 1.0, 0.1, 1.0, SarcCorrection::step);
  CHECK(s.rho_hat == doctest::Approx(0.8));
  const RatioReport z = ratio_sarc(2.0, 2.0, 0.2, 1.0, 0.0, 0.3);
  CHECK(z.rho_hat == z.rho_tilde);
  const RatioReport t = ratio_sarc(2.0, 2.0, 0.2, 3.0, 0.1, 0.5, SarcCorrection::sigma);
  CHECK(t.rho_hat == doctest::Approx(0.9 - 0.2 / 0.25 / 2.0));
}

TEST_CASE("degenerate decreases are flagged") {
  const RatioReport r = ratio_str(0.0, 1.0, 0.5, 1.0, 0.0);
  CHECK(r.degenerate);
  CHECK(std::isinf(r.rho_hat));
  CHECK(r.rho_hat < 0);
  CHECK(ratio_str(-1.0, 1.0, 0.5, 1.0, 0.0).degenerate);
  CHECK(ratio_str(1e-15, 1.0, 0.5, 1.0, 0.0).degenerate);
  CHECK_FALSE(ratio_str(1e-13, 1.0, 0.5, 1.0, 0.0).degenerate);
}

TEST_CASE("model-based ratios use the model decrease") {
  const ModelState m = tr_model(0.0, vec({1, 0}), SymmetricOperator::identity(2), 1.0, 0.05);
  const Vector s = vec({-1, 0});
  const RatioReport r = ratio_str(m, 1.0, 0.6, s);
  CHECK(r.model_decrease == doctest::Approx(0.5));
  CHECK(r.rho_tilde == doctest::Approx(0.8));
  CHECK(r.rho_hat == doctest::Approx(0.8 - 0.1 / 0.5));
  const ModelState p = cubic_model(0.0, vec({1}), SymmetricOperator::from_dense(Matrix::Zero(1, 1)), 1.0);
  const RatioReport q = ratio_sarc(p, 1.0, 1.0 - 2.0 / 3.0, vec({-1}));
  CHECK(q.model_decrease == doctest::Approx(2.0 / 3.0));
  CHECK(q.rho_tilde == doctest::Approx(1.0));
}

TEST_CASE("rho_hat never exceeds rho_tilde and the rearrangement agrees") {
  Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    const double dec = std::exp(rng.uniform(-10, 5));
    const double h_x = rng.uniform(-10, 10);
    const double h_xs = h_x - rng.uniform(-2, 2) * dec;
    const double sn = std::exp(rng.uniform(-5, 3));
    const double eps_h = std::exp(rng.uniform(-12, 0));
    const RatioReport r = ratio_str(dec, h_x, h_xs, sn, eps_h);
    CHECK(r.rho_hat <= r.rho_tilde);
    const double correction = 2.0 * eps_h * sn * sn;
    const double lhs = 1.0 - r.rho_hat;
    CHECK(std::abs(one_minus_rho_hat(dec, h_x - h_xs, correction) - lhs) <=
          1e-12 * std::max(1.0, std::abs(lhs)));
    const double sigma = std::exp(rng.uniform(-3, 3));
    const RatioReport c = ratio_sarc(dec, h_x, h_xs, sn, eps_h, sigma);
    CHECK(c.rho_hat <= c.rho_tilde);
  }
}
