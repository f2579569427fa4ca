#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sso/linear_operator.hpp"
#include "sso/rng.hpp"

namespace sso {

/// Reference vs candidate comparison. `passed` depends only on the gaps and
/// the tolerance: rel_gap <= tolerance.
struct OracleReport {
  std::vector<double> reference;
  std::vector<double> candidate;
  double abs_gap = 0.0;
  double rel_gap = 0.0;  // abs_gap / max(1, |reference|)
  double tolerance = 0.0;
  bool passed = false;
};

OracleReport make_report(std::vector<double> reference, std::vector<double> candidate,
                         double tolerance);

struct LineSearchOracle {
  double alpha = 0.0;     // best grid point, step is -alpha g
  double decrease = 0.0;  // model decrease at that point
  double resolution = 0.0;
};

/// Grid search of m(-alpha g) over alpha in [0, radius/||g||].
LineSearchOracle brute_force_tr_1d(const Vector& g, const SymmetricOperator& b, double radius,
                                   std::size_t grid = 10000);

/// Grid search of p(-alpha g) over alpha in [0, (11/4) max{b_norm/sigma, sqrt(||g||/sigma)} / ||g||].
LineSearchOracle brute_force_cubic_1d(const Vector& g, const SymmetricOperator& b, double b_norm,
                                      double sigma, std::size_t grid = 10000);

using ScalarFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;
using HvpFn = std::function<Vector(const Vector&, const Vector&)>;

/// Central differences against an analytic gradient at every point. The
/// report holds the worst point; reference = analytic, candidate = numeric.
OracleReport finite_diff_check(const ScalarFn& fn, const GradientFn& grad_fn,
                               const std::vector<Vector>& points, double step = 1e-6,
                               double tolerance = 1e-5);

/// Central differences of the gradient against Hessian-vector products along
/// the given directions.
OracleReport finite_diff_hvp_check(const GradientFn& grad_fn, const HvpFn& hvp_fn,
                                   const std::vector<Vector>& points,
                                   const std::vector<Vector>& directions, double step = 1e-5,
                                   double tolerance = 1e-5);

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// Smallest eigenpair by full symmetric eigendecomposition (d <= 512).
EigenPair dense_min_eig(const Matrix& b);

/// Q diag(lambda) Q^T with Q Haar-random; eigenvalues uniform in [lo, hi].
Matrix random_symmetric(Eigen::Index d, double lo, double hi, Rng& rng);

/// Random subproblem instance: d in [1, max_dim], mixed-sign spectrum with
/// ||B|| up to 10, ||g|| log-uniform in [g_lo, g_hi].
struct SubproblemInstance {
  Vector g;
  Matrix b;
};
SubproblemInstance random_subproblem(Rng& rng, Eigen::Index max_dim = 20, double g_lo = 1e-3,
                                     double g_hi = 1e3);

/// Log-uniform draw in [lo, hi].
double log_uniform(Rng& rng, double lo, double hi);

struct SelfCheckRow {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst_gap = 0.0;
  bool passed() const { return failures == 0; }
};

/// Oracle battery over seeded random instances.
std::vector<SelfCheckRow> run_self_check(std::uint64_t seed = 0);

}  // namespace sso
