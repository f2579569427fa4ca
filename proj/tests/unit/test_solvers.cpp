#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "helpers.hpp"
#include "sso/oracles.hpp"
#include "sso/solvers.hpp"

using namespace sso;
using sso::testing::vec;

namespace {

SymmetricOperator dense(const Matrix& m) { return SymmetricOperator::from_dense(m); }

Matrix diag(std::initializer_list<double> values) { return vec(values).asDiagonal(); }

double spectral_norm(const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double m_dec(const Vector& g, const Matrix& b, const Vector& s) {
  return -(g.dot(s) + 0.5 * s.dot(b * s));
}

double p_dec(const Vector& g, const Matrix& b, double sigma, const Vector& s) {
  return m_dec(g, b, s) - sigma / 3.0 * std::pow(s.norm(), 3);
}

}  // namespace

TEST_CASE("tr cauchy point examples") {
  const SubproblemSolution a = cauchy_point_tr(vec({1, 0}), SymmetricOperator::identity(2), 10.0);
  CHECK(a.s.isApprox(vec({-1, 0})));
  CHECK(a.hvp_count == 1);
  const LineSearchOracle oa = brute_force_tr_1d(vec({1, 0}), SymmetricOperator::identity(2), 10.0, 100000);
  CHECK(a.predicted_decrease >= oa.decrease - 1e-12);
  CHECK(oa.alpha == doctest::Approx(1.0));
  CHECK(oa.decrease == doctest::Approx(0.5));

  const SubproblemSolution b = cauchy_point_tr(vec({2, 0}), dense(diag({-1, 1})), 1.0);
  CHECK(b.s.isApprox(vec({-1, 0})));
  const LineSearchOracle ob = brute_force_tr_1d(vec({2, 0}), dense(diag({-1, 1})), 1.0, 100000);
  CHECK(b.predicted_decrease >= ob.decrease - 1e-12);

  const SubproblemSolution z = cauchy_point_tr(Vector::Zero(3), SymmetricOperator::identity(3), 1.0);
  CHECK(z.s.norm() == 0.0);
  CHECK(z.predicted_decrease == 0.0);
}

TEST_CASE("tr cauchy decrease bound and steihaug dominance on random instances") {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const SubproblemInstance inst = random_subproblem(rng);
    const double radius = log_uniform(rng, 1e-3, 1e2);
    const SymmetricOperator b = dense(inst.b);
    const double gn = inst.g.norm();
    const SubproblemSolution c = cauchy_point_tr(inst.g, b, radius);
    CHECK(c.s.norm() <= radius * (1.0 + 1e-12));
    const double dec = m_dec(inst.g, inst.b, c.s);
    CHECK(dec >= 0.5 * gn * std::min(radius, gn / spectral_norm(inst.b)) - 1e-10);
    const SubproblemSolution st = steihaug_cg(inst.g, b, radius, steihaug_default_tol(inst.g),
                                              2 * static_cast<std::size_t>(inst.g.size()));
    CHECK(st.s.norm() <= radius * (1.0 + 1e-12));
    CHECK(m_dec(inst.g, inst.b, st.s) >= dec - 1e-10 * std::max(1.0, dec));
    CHECK(st.predicted_decrease >= -1e-12);
    CHECK((b.apply(st.s) - st.bs).norm() <= 1e-9 * std::max(1.0, st.bs.norm()));
  }
}

TEST_CASE("steihaug examples") {
  const SubproblemSolution a = steihaug_cg(vec({1, 0}), SymmetricOperator::identity(2), 10.0, 1e-10, 4);
  CHECK(a.s.isApprox(vec({-1, 0})));
  CHECK(a.hvp_count == 1);
  CHECK_FALSE(a.boundary_hit);

  const SubproblemSolution n = steihaug_cg(vec({1, 1}), dense(diag({1, -2})), 3.0, 1e-10, 4);
  CHECK(n.s.norm() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(n.boundary_hit);

  const Vector g = vec({3, -4});
  const SubproblemSolution tiny = steihaug_cg(g, dense(diag({2, 5})), 1e-8, 1e-12, 4);
  CHECK(tiny.s.norm() == doctest::Approx(1e-8));
  CHECK((tiny.s / tiny.s.norm() + g / g.norm()).norm() < 1e-9);

  const SubproblemSolution cap = steihaug_cg(vec({1, 2, 3, 4}), dense(diag({1, 2, 3, 4})), 100.0, 1e-14, 1);
  CHECK(cap.max_iter_hit);
}

TEST_CASE("arc cauchy step") {
  const SubproblemSolution a = cauchy_step_arc(vec({2, 0}), SymmetricOperator::identity(2), 1.0, 2.0);
  const double alpha = 2.0 / (1.0 + std::sqrt(17.0));
  CHECK(alpha == doctest::Approx(0.390388).epsilon(1e-6));
  CHECK(a.s(0) == doctest::Approx(-2.0 * alpha));
  CHECK(a.s(0) == doctest::Approx(-0.780776).epsilon(1e-6));
  const LineSearchOracle o = brute_force_cubic_1d(vec({2, 0}), SymmetricOperator::identity(2), 1.0, 2.0);
  CHECK(o.decrease >= a.predicted_decrease - 1e-6);
  CHECK(a.predicted_decrease >= 0.2 * std::min(2.0, 1.0));

  const SubproblemSolution lim = cauchy_step_arc(vec({0.7, -0.2}), SymmetricOperator::identity(2), 1.0, 1e-12);
  CHECK(lim.s.isApprox(vec({-0.7, 0.2}), 1e-9));

  const SubproblemSolution z = cauchy_step_arc(Vector::Zero(2), SymmetricOperator::identity(2), 1.0, 1.0);
  CHECK(z.s.norm() == 0.0);
}

TEST_CASE("arc cauchy bounds on random instances") {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const SubproblemInstance inst = random_subproblem(rng);
    const double sigma = log_uniform(rng, 1e-3, 1e3);
    const double bn = spectral_norm(inst.b);
    const SubproblemSolution c = cauchy_step_arc(inst.g, dense(inst.b), bn, sigma);
    const double gn = inst.g.norm();
    CHECK(p_dec(inst.g, inst.b, sigma, c.s) >=
          gn / 10.0 * std::min(gn / bn, std::sqrt(gn / sigma)) - 1e-10);
    CHECK(c.s.norm() <= 2.75 * std::max(bn / sigma, std::sqrt(gn / sigma)));
  }
}

TEST_CASE("power iteration overestimates the norm on random matrices") {
  Rng rng(3);
  Rng prng(4);
  for (int t = 0; t < 50; ++t) {
    const Matrix b = random_symmetric(10, -3.0, 3.0, rng);
    const NormEstimate est = estimate_operator_norm(dense(b), prng);
    CHECK(est.hvp_count == static_cast<std::size_t>(kPowerIterations));
    CHECK(est.norm <= kNormSafety * spectral_norm(b) * (1.0 + 1e-12));
  }
}

TEST_CASE("refine_arc examples") {
  const SymmetricOperator zero = dense(Matrix::Zero(1, 1));
  const SubproblemSolution c = cauchy_step_arc(vec({1}), zero, 0.0, 1.0);
  const SubproblemSolution r = refine_arc(vec({1}), zero, 1.0, c.s);
  CHECK(r.conditions_met);
  CHECK(r.s(0) == doctest::Approx(-1.0).epsilon(1e-10));
  const ArcConditionReport rep = check_arc_conditions(vec({1}), zero, 1.0, vec({-1}), 0.5);
  CHECK(rep.eq10_residual == doctest::Approx(0.0));
  CHECK(rep.ineq10b_value == doctest::Approx(1.0));
  CHECK(rep.grad_norm_ratio == doctest::Approx(0.0));
  CHECK(rep.satisfied());

  // Already stationary: returned unchanged.
  const SubproblemSolution same = refine_arc(vec({1}), zero, 1.0, vec({-1}));
  CHECK(same.s(0) == -1.0);
  CHECK(same.conditions_met);
}

TEST_CASE("refine_arc decreases p and certifies conditions") {
  Rng rng(5);
  int certified = 0;
  for (int t = 0; t < 300; ++t) {
    const SubproblemInstance inst = random_subproblem(rng);
    const double sigma = log_uniform(rng, 1e-3, 1e3);
    const double bn = spectral_norm(inst.b);
    const SymmetricOperator b = dense(inst.b);
    const SubproblemSolution c = cauchy_step_arc(inst.g, b, bn, sigma);
    const SubproblemSolution r = refine_arc(inst.g, b, sigma, c.s, c.bs);
    const double dc = p_dec(inst.g, inst.b, sigma, c.s);
    const double dr = p_dec(inst.g, inst.b, sigma, r.s);
    CHECK(dr >= dc - 1e-12 * std::max(1.0, dc));
    CHECK(r.predicted_decrease == doctest::Approx(dr).epsilon(1e-9));
    if (r.conditions_met) {
      ++certified;
      CHECK(check_arc_conditions(inst.g, b, sigma, r.s, 0.5).satisfied());
      CHECK(dr >= sigma / 6.0 * std::pow(r.s.norm(), 3) - 1e-10 * std::max(1.0, dr));
    }
  }
  CHECK(certified >= 270);
}

TEST_CASE("check_arc_conditions edge cases") {
  const SymmetricOperator b = SymmetricOperator::identity(2);
  const ArcConditionReport z = check_arc_conditions(vec({1, 2}), b, 1.0, Vector::Zero(2), 0.5);
  CHECK(z.eq10_residual == 0.0);
  CHECK(z.grad_norm_ratio == doctest::Approx(1.0));
  CHECK_FALSE(z.theta_ok);

  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const Matrix m = random_symmetric(3, -2, 2, rng);
    const Vector g = testing::random_vector(rng, 3);
    const Vector s = testing::random_vector(rng, 3);
    const double c = std::exp(rng.uniform(-2, 2));
    const ArcConditionReport a = check_arc_conditions(g, dense(m), 0.7, s, 0.5);
    const ArcConditionReport k = check_arc_conditions(c * g, dense(c * m), c * 0.7, s, 0.5);
    CHECK(k.eq10_residual == doctest::Approx(c * a.eq10_residual).epsilon(1e-10));
  }
}

TEST_CASE("lanczos examples and dense agreement") {
  Rng rng(7);
  const LanczosResult d = lanczos_min_eig(dense(diag({2, -3})), 1e-10, 0, rng);
  CHECK(d.lambda_min_est == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(std::abs(std::abs(d.direction(1)) - 1.0) < 1e-8);
  CHECK(d.direction.norm() == doctest::Approx(1.0));
  const LanczosResult id = lanczos_min_eig(SymmetricOperator::identity(5), 1e-10, 0, rng);
  CHECK(id.lambda_min_est == doctest::Approx(1.0));
  Rng mrng(8);
  for (int t = 0; t < 20; ++t) {
    const Matrix m = random_symmetric(50, -4, 4, mrng);
    const EigenPair ref = dense_min_eig(m);
    const LanczosResult lz = lanczos_min_eig(dense(m), 1e-8, 0, rng);
    CHECK(std::abs(lz.lambda_min_est - ref.value) <= 1e-6);
    CHECK(lz.hvp_count <= 50);
  }
}

TEST_CASE("negative curvature steps") {
  CHECK(negative_curvature_step(vec({0, 1}), 2.0, vec({0, 1})).isApprox(vec({0, -2})));
  CHECK(negative_curvature_step(vec({1, 0}), 2.0, vec({0, 1})).isApprox(vec({2, 0})));
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const Matrix m = random_symmetric(8, -3, 3, rng);
    const Vector g = testing::random_vector(rng, 8, 1e-3);
    const LanczosResult lz = lanczos_min_eig(dense(m), 1e-9, 0, rng);
    const SubproblemSolution tr = negative_curvature_solution_tr(g, dense(m), lz.direction, 1.5);
    CHECK(tr.s.norm() == doctest::Approx(1.5));
    CHECK(g.dot(tr.s) <= 0.0);
    CHECK(tr.s.dot(m * tr.s) / tr.s.squaredNorm() <= lz.lambda_min_est + 1e-6);
    CHECK(tr.predicted_decrease > 0.0);
    const SubproblemSolution arc = negative_curvature_solution_arc(g, dense(m), lz.direction, 0.8);
    CHECK(arc.kind == StepKind::neg_curv);
    CHECK(arc.predicted_decrease > 0.0);
  }
}
