#include "sso/models.hpp"

#include <cmath>

#include "sso/error.hpp"

namespace sso {

double eval_m(const ModelState& model, const Vector& s) {
  require(s.size() == model.g.size(), "step has wrong dimension");
  return model.h + model.g.dot(s) + 0.5 * s.dot(model.b.apply(s));
}

double eval_p(const ModelState& model, const Vector& s) {
  require(model.kind == ModelKind::cubic, "eval_p needs a cubic model");
  const double norm = s.norm();
  return eval_m(model, s) + model.sigma() / 3.0 * norm * norm * norm;
}

double quadratic_decrease(const Vector& g, const Vector& s, const Vector& bs) {
  return -g.dot(s) - 0.5 * s.dot(bs);
}

double cubic_decrease(const Vector& g, const Vector& s, const Vector& bs, double sigma) {
  const double norm = s.norm();
  return quadratic_decrease(g, s, bs) - sigma / 3.0 * norm * norm * norm;
}

double degeneracy_floor(double h_x) { return 1e-14 * std::max(1.0, std::abs(h_x)); }

namespace {

RatioReport make_report(double model_decrease, double h_x, double h_xs, double correction) {
  RatioReport r;
  r.model_decrease = model_decrease;
  r.actual_decrease = h_x - h_xs;
  if (!(model_decrease > degeneracy_floor(h_x))) {
    r.degenerate = true;
    return r;
  }
  r.rho_tilde = r.actual_decrease / model_decrease;
  r.rho_hat = r.rho_tilde - correction / model_decrease;
  return r;
}

}  // namespace

RatioReport ratio_str(double model_decrease, double h_x, double h_xs, double step_norm,
                      double eps_h) {
  require(eps_h >= 0.0, "eps_h must be nonnegative");
  return make_report(model_decrease, h_x, h_xs, 2.0 * eps_h * step_norm * step_norm);
}

RatioReport ratio_str(const ModelState& model, double h_x, double h_xs, const Vector& s) {
  require(model.kind == ModelKind::trust_region, "ratio_str needs a trust-region model");
  return ratio_str(model.h - eval_m(model, s), h_x, h_xs, s.norm(), model.eps_h);
}

RatioReport ratio_sarc(double model_decrease, double h_x, double h_xs, double step_norm,
                       double eps_h, double sigma, SarcCorrection mode) {
  require(eps_h >= 0.0, "eps_h must be nonnegative");
  require(sigma > 0.0, "sigma must be positive");
  const double correction = mode == SarcCorrection::sigma ? 2.0 * eps_h / (sigma * sigma)
                                                          : 2.0 * eps_h * step_norm * step_norm;
  return make_report(model_decrease, h_x, h_xs, correction);
}

RatioReport ratio_sarc(const ModelState& model, double h_x, double h_xs, const Vector& s,
                       SarcCorrection mode) {
  return ratio_sarc(model.h - eval_p(model, s), h_x, h_xs, s.norm(), model.eps_h, model.sigma(),
                    mode);
}

double one_minus_rho_hat(double model_decrease, double actual_decrease, double correction) {
  return (model_decrease - actual_decrease + correction) / model_decrease;
}

}  // namespace sso
