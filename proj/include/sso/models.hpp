#pragma once

#include <limits>

#include "sso/linear_operator.hpp"

namespace sso {

enum class ModelKind { trust_region, cubic };

/// Which correction the cubic acceptance ratio subtracts:
///   sigma: 2 eps_h / sigma^2   (as the algorithm is usually printed)
///   step:  2 eps_h ||s||^2     (the form used by the trust-region variant)
enum class SarcCorrection { sigma, step };

/// One iteration's local model: h + <g, s> + 0.5 <s, B s>, plus either a
/// trust-region radius or a cubic weight sigma (the model kind says which).
struct ModelState {
  double h = 0.0;
  Vector g;
  SymmetricOperator b;
  double b_norm_estimate = 0.0;
  ModelKind kind = ModelKind::trust_region;
  double radius_or_sigma = 1.0;
  double eps_h = 0.0;

  double radius() const { return radius_or_sigma; }
  double sigma() const { return radius_or_sigma; }
};

/// Acceptance statistics for a trial step.
struct RatioReport {
  double model_decrease = 0.0;   // m(0) - m(s) or p(0) - p(s)
  double actual_decrease = 0.0;  // h(x) - h(x + s)
  double rho_tilde = -std::numeric_limits<double>::infinity();
  double rho_hat = -std::numeric_limits<double>::infinity();
  bool degenerate = false;  // model decrease at or below the floor; never accepted
};

double eval_m(const ModelState& model, const Vector& s);
double eval_p(const ModelState& model, const Vector& s);

/// m(0) - m(s) = -<g, s> - 0.5 <s, B s>.
double quadratic_decrease(const Vector& g, const Vector& s, const Vector& bs);
/// p(0) - p(s) = m(0) - m(s) - sigma/3 ||s||^3.
double cubic_decrease(const Vector& g, const Vector& s, const Vector& bs, double sigma);

/// Floor below which a model decrease is treated as zero: 1e-14 * max(1, |h_x|).
double degeneracy_floor(double h_x);

/// rho_tilde = (h_x - h_xs) / decrease, rho_hat = rho_tilde - 2 eps_h ||s||^2 / decrease.
RatioReport ratio_str(double model_decrease, double h_x, double h_xs, double step_norm,
                      double eps_h);
RatioReport ratio_str(const ModelState& model, double h_x, double h_xs, const Vector& s);

/// As ratio_str with the cubic model decrease; the correction follows `mode`.
RatioReport ratio_sarc(double model_decrease, double h_x, double h_xs, double step_norm,
                       double eps_h, double sigma, SarcCorrection mode = SarcCorrection::sigma);
RatioReport ratio_sarc(const ModelState& model, double h_x, double h_xs, const Vector& s,
                       SarcCorrection mode = SarcCorrection::sigma);

/// 1 - rho_hat written as (decrease - actual + correction) / decrease.
double one_minus_rho_hat(double model_decrease, double actual_decrease, double correction);

}  // namespace sso
