#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "sso/problems.hpp"
#include "sso/rng.hpp"

namespace sso {

/// The three index collections of one iteration: function (h), gradient (g)
/// and Hessian (b). Every set is sorted ascending and duplicate free.
struct SampleSets {
  IndexSet s_h;
  IndexSet s_g;
  IndexSet s_b;
  bool coupled = false;  // s_h was set to s_g
};

struct SampleSizes {
  std::size_t h = 0;
  std::size_t g = 0;
  std::size_t b = 0;
};

/// Accuracy targets. eps_g / eps_b / eps_h bound the estimator errors, the two
/// targets define the (eps_grad_target, eps_hess_target)-optimality being sought.
struct InexactnessBudget {
  double eps_g = 0.0;
  double eps_b = 0.0;
  double eps_h = 0.0;
  double v0 = 1.0;
  double delta = 0.1;
  double eps_grad_target = 1e-6;
  double eps_hess_target = 1e-6;

  /// Throws ContractViolation unless eps_grad_target > eps_g >= 0,
  /// eps_hess_target > eps_b >= 0, eps_h >= 0, 0 < v0 <= 1 and 0 < delta < 1.
  void validate() const;
};

/// delta0 = 1 - (1 - delta)^(1/T), so that T independent successes have
/// joint probability 1 - delta.
double per_iteration_delta(double delta, std::size_t iterations);

/// Rounds a real-valued sample bound up to a count. Values within 1e-9
/// (relative) of an integer are treated as that integer so closed forms such
/// as 16 * ln(e^2) = 32 do not pick up a spurious extra sample.
std::uint64_t ceil_count(double bound);

// Concentration-based sizes. All logarithms are natural.

/// 16 ln(2d/delta0) L^2 / eps_g^2.
double gradient_sample_bound(Eigen::Index d, double delta0, double lip_grad_bound, double eps_g);
std::uint64_t gradient_sample_size(Eigen::Index d, double delta0, double lip_grad_bound,
                                   double eps_g);

/// 16 ln(2d/delta0) L_B^2 / (v0^2 eps_b^2).
double hessian_sample_bound(Eigen::Index d, double delta0, double lip_hess_bound, double eps_b,
                            double v0 = 1.0);
std::uint64_t hessian_sample_size(Eigen::Index d, double delta0, double lip_hess_bound,
                                  double eps_b, double v0 = 1.0);

/// delta_c = sqrt(max(delta_max^2, 1/sigma_min^2)).
double function_size_delta_c(double delta_max, double sigma_min);

/// 16 kappa_f^2 ln(2d/delta0) / (eps_h^2 delta_c^4).
double function_sample_bound(Eigen::Index d, double delta0, double kappa_f, double eps_h,
                             double delta_c);
std::uint64_t function_sample_size(Eigen::Index d, double delta0, double kappa_f, double eps_h,
                                   double delta_c);

/// min{n, max{H1/eps_g, H2/eps_b}}, rounded up and at least 1. The ratio is
/// used verbatim as a count even though H1/eps_g is dimensionless only when
/// H1 and eps_g share units.
std::size_t theorem_sample_size(std::size_t n, double h1, double h2, double eps_g, double eps_b);

struct VarianceBounds {
  double h1 = 0.0;
  double h2 = 0.0;
  bool h2_estimated = false;  // true when the Hutchinson path was used
};

struct VarianceOptions {
  Eigen::Index dense_dim_limit = 64;  // exact spectral norms up to this dimension
  int hutchinson_probes = 8;
  std::size_t max_samples = 0;  // 0: use every sample
  std::uint64_t seed = 0;
};

/// H1^2 = max over probes of (1/n) sum ||grad f_i - grad f||^2, and the same
/// for Hessian deviations in spectral norm (dense path) or a Frobenius-norm
/// Hutchinson estimate, which upper-bounds the spectral norm in expectation.
VarianceBounds estimate_variance_bounds(const FiniteSumProblem& problem,
                                        std::span<const Vector> probes,
                                        const VarianceOptions& options = {});

/// Uniform subset of [0, n) of the given size without replacement, sorted.
/// size == n yields 0..n-1.
IndexSet draw_index_set(Rng& rng, std::size_t n, std::size_t size);

/// Draws s_g, then s_b, then s_h (or copies s_g into s_h when
/// coupling_trigger is set, ignoring sizes.h).
SampleSets draw_sets(Rng& rng, std::size_t n, const SampleSizes& sizes, bool coupling_trigger);

}  // namespace sso
