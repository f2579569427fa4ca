#pragma once

#include <cstddef>

#include "sso/linear_operator.hpp"
#include "sso/rng.hpp"

namespace sso {

enum class StepKind { cauchy_tr, steihaug, cauchy_arc, refined_arc, neg_curv };

const char* to_string(StepKind kind);

/// Output of every inner solver. `hvp_count` is the number of operator
/// applications spent (the gamma of the propagation count).
struct SubproblemSolution {
  Vector s;
  Vector bs;  // B s, tracked so callers need no extra product
  std::size_t hvp_count = 0;
  StepKind kind = StepKind::cauchy_tr;
  double predicted_decrease = 0.0;  // m(0) - m(s), or p(0) - p(s) for cubic kinds
  bool boundary_hit = false;
  bool max_iter_hit = false;
  bool conditions_met = false;  // cubic kinds: conditions certified at s
  double residual_norm = 0.0;   // CG residual, or ||grad p(s)|| for cubic kinds
};

/// Cauchy point of the trust-region model: s = -tau (radius/||g||) g.
SubproblemSolution cauchy_point_tr(const Vector& g, const SymmetricOperator& b, double radius);

/// min(0.5, sqrt(||g||)) * ||g||.
double steihaug_default_tol(const Vector& g);

/// Truncated CG for min m(s) s.t. ||s|| <= radius. Exits on the boundary when
/// it meets negative curvature or leaves the region.
SubproblemSolution steihaug_cg(const Vector& g, const SymmetricOperator& b, double radius,
                               double tol, std::size_t max_iter);

/// Power iteration for ||B||, inflated by `safety` since the raw estimate is
/// biased low and the cubic Cauchy step needs an upper bound.
struct NormEstimate {
  double norm = 0.0;
  std::size_t hvp_count = 0;
};
inline constexpr int kPowerIterations = 20;
inline constexpr double kNormSafety = 1.1;
NormEstimate estimate_operator_norm(const SymmetricOperator& b, Rng& rng,
                                    int iterations = kPowerIterations, double safety = kNormSafety);

/// s = -alpha g with alpha = 2 / (||B|| + sqrt(||B||^2 + 4 sigma ||g||)).
SubproblemSolution cauchy_step_arc(const Vector& g, const SymmetricOperator& b, double b_norm,
                                   double sigma);

/// Moves s along its own ray to the minimiser of p over t >= 0 (flipping the
/// direction first when <g, s> > 0). The result satisfies
/// <g,s> + <s,Bs> + sigma ||s||^3 = 0 and <s,Bs> + sigma ||s||^3 >= 0, and p never increases.
void normalize_on_ray(const Vector& g, double sigma, Vector& s, Vector& bs);

struct RefineOptions {
  double kappa_theta = 0.5;
  std::size_t max_iter = 50;
};

/// Monotone gradient descent on p starting from `start`, with a ray
/// normalisation after every step. Stops once the conditions hold; if they
/// never do the last (lowest) iterate is returned with conditions_met=false.
SubproblemSolution refine_arc(const Vector& g, const SymmetricOperator& b, double sigma,
                              const Vector& start, const RefineOptions& options = {});
/// Same, with B * start already known (saves one product).
SubproblemSolution refine_arc(const Vector& g, const SymmetricOperator& b, double sigma,
                              const Vector& start, const Vector& b_start,
                              const RefineOptions& options = {});

struct ArcConditionReport {
  double eq10_residual = 0.0;   // |<g,s> + <s,Bs> + sigma ||s||^3|
  double ineq10b_value = 0.0;   // <s,Bs> + sigma ||s||^3
  double grad_norm_ratio = 0.0; // ||grad p(s)|| / ||g||
  bool theta_ok = false;        // ratio <= kappa_theta * min(1, ||s||)
  double scale = 0.0;           // |<g,s>| + |<s,Bs>| + sigma ||s||^3

  /// Residual within rel_tol * scale, curvature term >= -1e-10 and theta_ok.
  bool satisfied(double rel_tol = 1e-8) const;
};

ArcConditionReport check_arc_conditions(const Vector& g, const SymmetricOperator& b, double sigma,
                                        const Vector& s, double kappa_theta);
ArcConditionReport check_arc_conditions(const Vector& g, double sigma, const Vector& s,
                                        const Vector& bs, double kappa_theta);

struct LanczosResult {
  double lambda_min_est = 0.0;
  Vector direction;  // unit norm
  std::size_t hvp_count = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Lanczos with full reorthogonalisation from a random start. Stops when the
/// smallest Ritz pair has residual <= tol, the Krylov space is invariant, or
/// max_iter steps (default: dimension) are taken. The estimate is an upper
/// bound on lambda_min; closeness holds with high probability over the start.
LanczosResult lanczos_min_eig(const SymmetricOperator& b, double tol, std::size_t max_iter,
                              Rng& rng);

/// s = +/- radius * v with the sign making <g, s> <= 0 (+v on a tie).
Vector negative_curvature_step(const Vector& v, double radius, const Vector& g);

/// Trust-region step along a negative-curvature direction (one product for B v).
SubproblemSolution negative_curvature_solution_tr(const Vector& g, const SymmetricOperator& b,
                                                  const Vector& v, double radius);

/// Cubic step along v: scaled to the ray minimiser of p, then refined.
SubproblemSolution negative_curvature_solution_arc(const Vector& g, const SymmetricOperator& b,
                                                   const Vector& v, double sigma,
                                                   const RefineOptions& options = {});

}  // namespace sso
