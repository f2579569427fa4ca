#include "sso/oracles.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "sso/data_io.hpp"
#include "sso/error.hpp"
#include "sso/problems.hpp"
#include "sso/solvers.hpp"

namespace sso {

OracleReport make_report(std::vector<double> reference, std::vector<double> candidate,
                         double tolerance) {
  require(reference.size() == candidate.size(), "reference and candidate sizes differ");
  OracleReport r;
  double diff2 = 0.0;
  double ref2 = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double diff = reference[i] - candidate[i];
    diff2 += diff * diff;
    ref2 += reference[i] * reference[i];
  }
  r.abs_gap = std::sqrt(diff2);
  r.rel_gap = r.abs_gap / std::max(1.0, std::sqrt(ref2));
  r.tolerance = tolerance;
  r.passed = r.rel_gap <= tolerance;
  r.reference = std::move(reference);
  r.candidate = std::move(candidate);
  return r;
}

namespace {

// Decrease of the model along -alpha g, with gg = <g,g>, gbg = <g,Bg>.
double ray_decrease(double alpha, double gg, double gbg, double cubic_coeff) {
  return alpha * gg - 0.5 * alpha * alpha * gbg - cubic_coeff * alpha * alpha * alpha;
}

LineSearchOracle grid_search(double alpha_max, double gg, double gbg, double cubic_coeff,
                             std::size_t grid) {
  LineSearchOracle best;
  best.resolution = alpha_max / static_cast<double>(grid);
  for (std::size_t j = 0; j <= grid; ++j) {
    const double alpha = best.resolution * static_cast<double>(j);
    const double dec = ray_decrease(alpha, gg, gbg, cubic_coeff);
    if (dec > best.decrease) {
      best.decrease = dec;
      best.alpha = alpha;
    }
  }
  return best;
}

}  // namespace

LineSearchOracle brute_force_tr_1d(const Vector& g, const SymmetricOperator& b, double radius,
                                   std::size_t grid) {
  require(grid >= 1, "grid needs at least one interval");
  require(radius > 0.0, "radius must be positive");
  const double gn = g.norm();
  if (gn == 0.0) return {};
  const Vector bg = b.apply(g);
  return grid_search(radius / gn, gn * gn, g.dot(bg), 0.0, grid);
}

LineSearchOracle brute_force_cubic_1d(const Vector& g, const SymmetricOperator& b, double b_norm,
                                      double sigma, std::size_t grid) {
  require(grid >= 1, "grid needs at least one interval");
  require(sigma > 0.0, "sigma must be positive");
  const double gn = g.norm();
  if (gn == 0.0) return {};
  const Vector bg = b.apply(g);
  const double bound = 2.75 * std::max(b_norm / sigma, std::sqrt(gn / sigma));
  return grid_search(bound / gn, gn * gn, g.dot(bg), sigma / 3.0 * gn * gn * gn, grid);
}

OracleReport finite_diff_check(const ScalarFn& fn, const GradientFn& grad_fn,
                               const std::vector<Vector>& points, double step, double tolerance) {
  require(step >= 1e-8 && step <= 1e-4, "finite-difference step must be in [1e-8, 1e-4]");
  require(!points.empty(), "need at least one point");
  OracleReport worst;
  worst.tolerance = tolerance;
  worst.passed = true;
  bool first = true;
  for (const Vector& x : points) {
    const Vector analytic = grad_fn(x);
    Vector numeric(x.size());
    Vector xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      xp(j) = x(j) + step;
      const double fp = fn(xp);
      xp(j) = x(j) - step;
      const double fm = fn(xp);
      xp(j) = x(j);
      numeric(j) = (fp - fm) / (2.0 * step);
    }
    OracleReport r = make_report(std::vector<double>(analytic.begin(), analytic.end()),
                                 std::vector<double>(numeric.begin(), numeric.end()), tolerance);
    if (first || r.rel_gap > worst.rel_gap) worst = std::move(r);
    first = false;
  }
  return worst;
}

OracleReport finite_diff_hvp_check(const GradientFn& grad_fn, const HvpFn& hvp_fn,
                                   const std::vector<Vector>& points,
                                   const std::vector<Vector>& directions, double step,
                                   double tolerance) {
  require(step >= 1e-8 && step <= 1e-4, "finite-difference step must be in [1e-8, 1e-4]");
  require(!points.empty() && !directions.empty(), "need points and directions");
  OracleReport worst;
  worst.tolerance = tolerance;
  worst.passed = true;
  bool first = true;
  for (const Vector& x : points) {
    for (const Vector& v : directions) {
      const Vector analytic = hvp_fn(x, v);
      const Vector numeric = (grad_fn(x + step * v) - grad_fn(x - step * v)) / (2.0 * step);
      OracleReport r = make_report(std::vector<double>(analytic.begin(), analytic.end()),
                                   std::vector<double>(numeric.begin(), numeric.end()), tolerance);
      if (first || r.rel_gap > worst.rel_gap) worst = std::move(r);
      first = false;
    }
  }
  return worst;
}

EigenPair dense_min_eig(const Matrix& b) {
  require(b.rows() == b.cols() && b.rows() > 0, "matrix must be square and non-empty");
  require(b.rows() <= 512, "dense eigensolver limited to d <= 512");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(b);
  require(solver.info() == Eigen::Success, "eigendecomposition failed");
  return {solver.eigenvalues()(0), solver.eigenvectors().col(0)};
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

Matrix random_symmetric(Eigen::Index d, double lo, double hi, Rng& rng) {
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  Vector lambda(d);
  for (Eigen::Index i = 0; i < d; ++i) lambda(i) = rng.uniform(lo, hi);
  Matrix b = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (b + b.transpose());
}

SubproblemInstance random_subproblem(Rng& rng, Eigen::Index max_dim, double g_lo, double g_hi) {
  const auto d = static_cast<Eigen::Index>(1 + rng.uniform_index(static_cast<std::uint64_t>(max_dim)));
  const double scale = log_uniform(rng, 1e-2, 10.0);
  const bool definite = rng.uniform_index(3) == 0;
  SubproblemInstance inst;
  inst.b = random_symmetric(d, definite ? 0.01 * scale : -scale, scale, rng);
  Vector dir(d);
  for (Eigen::Index i = 0; i < d; ++i) dir(i) = rng.normal();
  inst.g = dir / dir.norm() * log_uniform(rng, g_lo, g_hi);
  return inst;
}

namespace {

double spectral_norm(const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(b, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double tr_model_decrease(const Vector& g, const Matrix& b, const Vector& s) {
  return -(g.dot(s) + 0.5 * s.dot(b * s));
}

double cubic_model_decrease(const Vector& g, const Matrix& b, double sigma, const Vector& s) {
  const double sn = s.norm();
  return -(g.dot(s) + 0.5 * s.dot(b * s) + sigma / 3.0 * sn * sn * sn);
}

void note(SelfCheckRow& row, bool ok, double gap) {
  ++row.instances;
  if (!ok) ++row.failures;
  row.worst_gap = std::max(row.worst_gap, gap);
}

}  // namespace

std::vector<SelfCheckRow> run_self_check(std::uint64_t seed) {
  std::vector<SelfCheckRow> rows;
  Rng rng(derive_seed(seed, 11));

  {
    SelfCheckRow row{"tr_cauchy_vs_grid"};
    for (int k = 0; k < 200; ++k) {
      const SubproblemInstance inst = random_subproblem(rng);
      const double radius = log_uniform(rng, 1e-2, 1e2);
      const SymmetricOperator b = SymmetricOperator::from_dense(inst.b);
      const LineSearchOracle grid = brute_force_tr_1d(inst.g, b, radius);
      const SubproblemSolution sol = cauchy_point_tr(inst.g, b, radius);
      const double dec = tr_model_decrease(inst.g, inst.b, sol.s);
      const double slack = 1e-9 * std::max(1.0, grid.decrease);
      note(row, dec >= grid.decrease - slack, std::max(0.0, grid.decrease - dec));
    }
    rows.push_back(row);
  }
  {
    SelfCheckRow row{"arc_cauchy_bounds_vs_grid"};
    for (int k = 0; k < 200; ++k) {
      const SubproblemInstance inst = random_subproblem(rng);
      const double sigma = log_uniform(rng, 1e-3, 1e3);
      const SymmetricOperator b = SymmetricOperator::from_dense(inst.b);
      const double bn = spectral_norm(inst.b);
      const SubproblemSolution sol = cauchy_step_arc(inst.g, b, bn, sigma);
      const double gn = inst.g.norm();
      const double dec = cubic_model_decrease(inst.g, inst.b, sigma, sol.s);
      const double lower = gn / 10.0 * std::min(gn / bn, std::sqrt(gn / sigma));
      const double step_bound = 2.75 * std::max(bn / sigma, std::sqrt(gn / sigma));
      const LineSearchOracle grid = brute_force_cubic_1d(inst.g, b, bn, sigma);
      // The Cauchy alpha is at most res/2 from a grid point; bound the loss
      // there by the slope of the ray decrease over the search interval.
      const double alpha_max = step_bound / gn;
      const double slope = gn * gn + alpha_max * std::abs(inst.g.dot(inst.b * inst.g)) +
                           sigma * alpha_max * alpha_max * gn * gn * gn;
      const double slack = 0.5 * grid.resolution * slope + 1e-9 * std::max(1.0, grid.decrease);
      const bool ok = dec >= lower - 1e-10 && sol.s.norm() <= step_bound * (1.0 + 1e-12) &&
                      grid.decrease >= dec - slack;
      note(row, ok, std::max(0.0, lower - dec));
    }
    rows.push_back(row);
  }
  {
    SelfCheckRow row{"fd_gradient_quadratic"};
    std::vector<Vector> centers;
    for (int i = 0; i < 5; ++i) centers.push_back(Vector::NullaryExpr(4, [&] { return rng.normal(); }));
    const QuadraticProblem quad(centers);
    std::vector<Vector> points;
    for (int i = 0; i < 10; ++i) points.push_back(Vector::NullaryExpr(4, [&] { return rng.uniform(-5, 5); }));
    const OracleReport r = finite_diff_check([&](const Vector& x) { return full_value(quad, x); },
                                             [&](const Vector& x) { return full_grad(quad, x); },
                                             points, 1e-5, 1e-9);
    note(row, r.passed, r.rel_gap);
    rows.push_back(row);
  }
  {
    const Dataset data = make_synthetic_binary(40, 12, 0.4, 0.1, derive_seed(seed, 12));
    const NllsLogisticProblem nlls(data.features, data.labels);
    std::vector<Vector> points;
    std::vector<Vector> dirs;
    for (int i = 0; i < 20; ++i) points.push_back(Vector::NullaryExpr(12, [&] { return rng.uniform(-2, 2); }));
    for (int i = 0; i < 3; ++i) dirs.push_back(Vector::NullaryExpr(12, [&] { return rng.normal(); }));
    SelfCheckRow grad_row{"fd_gradient_nlls"};
    const OracleReport rg = finite_diff_check([&](const Vector& x) { return full_value(nlls, x); },
                                              [&](const Vector& x) { return full_grad(nlls, x); },
                                              points);
    note(grad_row, rg.passed, rg.rel_gap);
    rows.push_back(grad_row);
    SelfCheckRow hvp_row{"fd_hvp_nlls"};
    const OracleReport rh = finite_diff_hvp_check(
        [&](const Vector& x) { return full_grad(nlls, x); },
        [&](const Vector& x, const Vector& v) { return full_hvp(nlls, x, v); }, points, dirs);
    note(hvp_row, rh.passed, rh.rel_gap);
    rows.push_back(hvp_row);
  }
  {
    SelfCheckRow row{"lanczos_vs_dense"};
    Rng lrng(derive_seed(seed, 13));
    for (int k = 0; k < 20; ++k) {
      const Matrix m = random_symmetric(30, -5.0, 5.0, rng);
      const EigenPair ref = dense_min_eig(m);
      const LanczosResult lz = lanczos_min_eig(SymmetricOperator::from_dense(m), 1e-9, 0, lrng);
      const double gap = std::abs(lz.lambda_min_est - ref.value);
      note(row, gap <= 1e-6, gap);
    }
    rows.push_back(row);
  }
  {
    SelfCheckRow row{"refine_arc_certified_decrease"};
    for (int k = 0; k < 100; ++k) {
      const SubproblemInstance inst = random_subproblem(rng);
      const double sigma = log_uniform(rng, 1e-3, 1e3);
      const SymmetricOperator b = SymmetricOperator::from_dense(inst.b);
      const double bn = spectral_norm(inst.b);
      const SubproblemSolution c = cauchy_step_arc(inst.g, b, bn, sigma);
      const SubproblemSolution sol = refine_arc(inst.g, b, sigma, c.s, c.bs);
      if (!sol.conditions_met) continue;
      const double sn = sol.s.norm();
      const double dec = cubic_model_decrease(inst.g, inst.b, sigma, sol.s);
      const double gap = sigma / 6.0 * sn * sn * sn - dec;
      note(row, gap <= 1e-10 * std::max(1.0, dec), std::max(0.0, gap));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sso
