#include <doctest.h>

#include <Eigen/QR>
#include <cmath>

#include "helpers.hpp"
#include "sso/oracles.hpp"

using namespace sso;
using sso::testing::vec;

TEST_CASE("trust-region line oracle") {
  const LineSearchOracle a = brute_force_tr_1d(vec({1, 0}), SymmetricOperator::identity(2), 10.0);
  CHECK(a.alpha == doctest::Approx(1.0));
  CHECK(a.decrease == doctest::Approx(0.5));
  // Convex cut with minimiser inside: decrease g^2/(2c).
  const Matrix b = vec({3.0}).asDiagonal();
  const LineSearchOracle c = brute_force_tr_1d(vec({2.0}), SymmetricOperator::from_dense(b), 5.0, 100000);
  CHECK(std::abs(c.decrease - 4.0 / 6.0) <= 1e-6);
  const LineSearchOracle z = brute_force_tr_1d(Vector::Zero(2), SymmetricOperator::identity(2), 1.0);
  CHECK(z.decrease == 0.0);
}

TEST_CASE("cubic line oracle") {
  const SymmetricOperator zero = SymmetricOperator::from_dense(Matrix::Zero(1, 1));
  const LineSearchOracle a = brute_force_cubic_1d(vec({1}), zero, 0.0, 1.0, 100000);
  CHECK(a.alpha == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(a.decrease == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  double prev_alpha = 1e300;
  double prev_dec = 1e300;
  for (double sigma : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    const LineSearchOracle o = brute_force_cubic_1d(vec({1}), zero, 0.0, sigma);
    CHECK(o.alpha > 0.0);
    CHECK(o.decrease > 0.0);
    CHECK(o.alpha < prev_alpha);
    CHECK(o.decrease < prev_dec);
    prev_alpha = o.alpha;
    prev_dec = o.decrease;
  }
}

TEST_CASE("finite differences") {
  const Vector c = vec({1, -2, 0.5});
  const OracleReport q = finite_diff_check(
      [&](const Vector& x) { return 0.5 * (x - c).squaredNorm(); },
      [&](const Vector& x) { return Vector(x - c); }, {vec({0, 0, 0}), vec({3, 1, -1})}, 1e-5, 1e-9);
  CHECK(q.passed);
  CHECK(q.rel_gap <= 1e-9);
  const OracleReport k = finite_diff_check([](const Vector&) { return 4.2; },
                                           [](const Vector& x) { return Vector(Vector::Zero(x.size())); },
                                           {vec({1, 2})});
  CHECK(k.abs_gap == 0.0);
  CHECK(k.passed);
  const OracleReport bad = finite_diff_check([](const Vector& x) { return x.squaredNorm(); },
                                             [](const Vector& x) { return Vector(x); }, {vec({1, 2})});
  CHECK_FALSE(bad.passed);
  CHECK_THROWS(finite_diff_check([](const Vector&) { return 0.0; },
                                 [](const Vector& x) { return x; }, {vec({1})}, 1e-2));
}

TEST_CASE("report gaps are nonnegative and pass is a function of the gap") {
  const OracleReport r = make_report({1.0, 2.0}, {1.0, 2.0 + 1e-7}, 1e-6);
  CHECK(r.abs_gap >= 0.0);
  CHECK(r.rel_gap >= 0.0);
  CHECK(r.passed);
  const OracleReport s = make_report({1.0, 2.0}, {1.0, 3.0}, 1e-6);
  CHECK_FALSE(s.passed);
}

TEST_CASE("dense eigen oracle") {
  const EigenPair a = dense_min_eig(vec({2, -3}).asDiagonal().toDenseMatrix());
  CHECK(a.value == doctest::Approx(-3.0));
  CHECK(std::abs(a.vector(1)) == doctest::Approx(1.0));
  const EigenPair id = dense_min_eig(Matrix::Identity(4, 4));
  CHECK(id.value == doctest::Approx(1.0));
  CHECK(id.vector.dot(id.vector) == doctest::Approx(1.0));
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index d = 12;
    Matrix q = Eigen::HouseholderQR<Matrix>(Matrix::NullaryExpr(d, d, [&] { return rng.normal(); }))
                   .householderQ();
    Vector lambda(d);
    for (Eigen::Index i = 0; i < d; ++i) lambda(i) = rng.uniform(-5, 5);
    const Matrix b = q * lambda.asDiagonal() * q.transpose();
    CHECK(std::abs(dense_min_eig(b).value - lambda.minCoeff()) <= 1e-10);
  }
}

TEST_CASE("self check battery passes") {
  for (const SelfCheckRow& row : run_self_check(0)) {
    INFO(row.name);
    CHECK(row.passed());
    CHECK(row.instances > 0);
  }
}
