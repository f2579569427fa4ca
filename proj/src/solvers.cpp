#include "sso/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "sso/error.hpp"
#include "sso/models.hpp"

namespace sso {

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::cauchy_tr: return "cauchy_tr";
    case StepKind::steihaug: return "steihaug";
    case StepKind::cauchy_arc: return "cauchy_arc";
    case StepKind::refined_arc: return "refined_arc";
    case StepKind::neg_curv: return "neg_curv";
  }
  return "unknown";
}

namespace {

SubproblemSolution zero_solution(Eigen::Index d, StepKind kind) {
  SubproblemSolution out;
  out.s = Vector::Zero(d);
  out.bs = Vector::Zero(d);
  out.kind = kind;
  return out;
}

// Positive root tau of ||z + tau d|| = radius, assuming ||z|| <= radius.
double boundary_tau(const Vector& z, const Vector& d, double radius) {
  const double a = d.squaredNorm();
  const double b = 2.0 * z.dot(d);
  const double c = std::min(0.0, z.squaredNorm() - radius * radius);
  const double root = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
  return b > 0.0 ? (-2.0 * c) / (b + root) : (-b + root) / (2.0 * a);
}

// Keeps a boundary step on the sphere despite rounding.
void clamp_to_radius(Vector& s, Vector& bs, double radius) {
  const double norm = s.norm();
  if (norm > radius) {
    const double scale = radius / norm;
    s *= scale;
    bs *= scale;
  }
}

double cubic_value(const Vector& g, double sigma, const Vector& s, const Vector& bs) {
  const double norm = s.norm();
  return g.dot(s) + 0.5 * s.dot(bs) + sigma / 3.0 * norm * norm * norm;
}

}  // namespace

SubproblemSolution cauchy_point_tr(const Vector& g, const SymmetricOperator& b, double radius) {
  require(radius > 0.0, "trust-region radius must be positive");
  require(g.size() == b.dim(), "gradient and operator dimensions differ");
  const double gnorm = g.norm();
  if (gnorm == 0.0) return zero_solution(g.size(), StepKind::cauchy_tr);

  const Vector bg = b.apply(g);
  const double gbg = g.dot(bg);
  const double tau = gbg <= 0.0 ? 1.0 : std::min(gnorm * gnorm * gnorm / (radius * gbg), 1.0);
  const double scale = -tau * radius / gnorm;

  SubproblemSolution out;
  out.kind = StepKind::cauchy_tr;
  out.s = scale * g;
  out.bs = scale * bg;
  out.hvp_count = 1;
  out.boundary_hit = tau == 1.0;
  clamp_to_radius(out.s, out.bs, radius);
  out.predicted_decrease = quadratic_decrease(g, out.s, out.bs);
  return out;
}

double steihaug_default_tol(const Vector& g) {
  const double gnorm = g.norm();
  return std::min(0.5, std::sqrt(gnorm)) * gnorm;
}

SubproblemSolution steihaug_cg(const Vector& g, const SymmetricOperator& b, double radius,
                               double tol, std::size_t max_iter) {
  require(radius > 0.0, "trust-region radius must be positive");
  require(tol > 0.0, "CG tolerance must be positive");
  require(g.size() == b.dim(), "gradient and operator dimensions differ");

  SubproblemSolution out = zero_solution(g.size(), StepKind::steihaug);
  Vector& z = out.s;
  Vector& bz = out.bs;
  Vector r = g;
  double rr = r.squaredNorm();
  out.residual_norm = std::sqrt(rr);
  if (out.residual_norm <= tol) return out;

  Vector d = -r;
  for (std::size_t k = 0; k < max_iter; ++k) {
    const Vector bd = b.apply(d);
    ++out.hvp_count;
    const double dbd = d.dot(bd);
    if (dbd <= 0.0) {
      const double tau = boundary_tau(z, d, radius);
      z += tau * d;
      bz += tau * bd;
      out.boundary_hit = true;
      break;
    }
    const double alpha = rr / dbd;
    if ((z + alpha * d).norm() >= radius) {
      const double tau = boundary_tau(z, d, radius);
      z += tau * d;
      bz += tau * bd;
      out.boundary_hit = true;
      break;
    }
    z += alpha * d;
    bz += alpha * bd;
    r += alpha * bd;
    const double rr_next = r.squaredNorm();
    out.residual_norm = std::sqrt(rr_next);
    if (out.residual_norm <= tol) break;
    d = -r + (rr_next / rr) * d;
    rr = rr_next;
    if (k + 1 == max_iter) out.max_iter_hit = true;
  }
  if (out.boundary_hit) clamp_to_radius(z, bz, radius);
  out.predicted_decrease = quadratic_decrease(g, z, bz);
  return out;
}

NormEstimate estimate_operator_norm(const SymmetricOperator& b, Rng& rng, int iterations,
                                    double safety) {
  require(iterations >= 1, "need at least one power iteration");
  require(safety >= 1.0, "safety factor must be >= 1");
  Vector q(b.dim());
  for (Eigen::Index j = 0; j < q.size(); ++j) q[j] = rng.normal();
  q.normalize();
  NormEstimate out;
  double estimate = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vector bq = b.apply(q);
    ++out.hvp_count;
    estimate = bq.norm();
    if (estimate == 0.0) break;
    q = bq / estimate;
  }
  out.norm = safety * estimate;
  return out;
}

SubproblemSolution cauchy_step_arc(const Vector& g, const SymmetricOperator& b, double b_norm,
                                   double sigma) {
  require(sigma > 0.0, "sigma must be positive");
  require(b_norm >= 0.0, "operator norm must be nonnegative");
  require(g.size() == b.dim(), "gradient and operator dimensions differ");
  const double gnorm = g.norm();
  if (gnorm == 0.0) return zero_solution(g.size(), StepKind::cauchy_arc);

  const double alpha = 2.0 / (b_norm + std::sqrt(b_norm * b_norm + 4.0 * sigma * gnorm));
  const Vector bg = b.apply(g);
  SubproblemSolution out;
  out.kind = StepKind::cauchy_arc;
  out.s = -alpha * g;
  out.bs = -alpha * bg;
  out.hvp_count = 1;
  out.predicted_decrease = cubic_decrease(g, out.s, out.bs, sigma);
  return out;
}

void normalize_on_ray(const Vector& g, double sigma, Vector& s, Vector& bs) {
  require(sigma > 0.0, "sigma must be positive");
  const double norm = s.norm();
  if (norm == 0.0) return;
  Vector u = s / norm;
  Vector bu = bs / norm;
  double gu = g.dot(u);
  if (gu > 0.0) {
    u = -u;
    bu = -bu;
    gu = -gu;
  }
  const double ubu = u.dot(bu);
  // Nonnegative root of sigma t^2 + ubu t + gu = 0 (gu <= 0 so exactly one).
  const double root = std::sqrt(ubu * ubu - 4.0 * sigma * gu);
  const double t = ubu > 0.0 ? (-2.0 * gu) / (ubu + root) : (-ubu + root) / (2.0 * sigma);
  s = t * u;
  bs = t * bu;
}

bool ArcConditionReport::satisfied(double rel_tol) const {
  return eq10_residual <= rel_tol * scale && ineq10b_value >= -1e-10 && theta_ok;
}

ArcConditionReport check_arc_conditions(const Vector& g, double sigma, const Vector& s,
                                        const Vector& bs, double kappa_theta) {
  require(sigma > 0.0, "sigma must be positive");
  const double norm = s.norm();
  const double cube = sigma * norm * norm * norm;
  const double gs = g.dot(s);
  const double sbs = s.dot(bs);
  ArcConditionReport r;
  r.eq10_residual = std::abs(gs + sbs + cube);
  r.ineq10b_value = sbs + cube;
  r.scale = std::abs(gs) + std::abs(sbs) + cube;
  const double grad_p = (g + bs + sigma * norm * s).norm();
  const double gnorm = g.norm();
  if (gnorm > 0.0) {
    r.grad_norm_ratio = grad_p / gnorm;
  } else {
    r.grad_norm_ratio = grad_p == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  r.theta_ok = r.grad_norm_ratio <= kappa_theta * std::min(1.0, norm);
  return r;
}

ArcConditionReport check_arc_conditions(const Vector& g, const SymmetricOperator& b, double sigma,
                                        const Vector& s, double kappa_theta) {
  require(g.size() == b.dim() && s.size() == b.dim(), "dimension mismatch");
  return check_arc_conditions(g, sigma, s, b.apply(s), kappa_theta);
}

SubproblemSolution refine_arc(const Vector& g, const SymmetricOperator& b, double sigma,
                              const Vector& start, const RefineOptions& options) {
  require(g.size() == b.dim() && start.size() == b.dim(), "dimension mismatch");
  if (start.squaredNorm() == 0.0) {
    return refine_arc(g, b, sigma, start, Vector::Zero(start.size()), options);
  }
  SubproblemSolution out = refine_arc(g, b, sigma, start, b.apply(start), options);
  ++out.hvp_count;
  return out;
}

SubproblemSolution refine_arc(const Vector& g, const SymmetricOperator& b, double sigma,
                              const Vector& start, const Vector& b_start,
                              const RefineOptions& options) {
  require(sigma > 0.0, "sigma must be positive");
  require(options.kappa_theta > 0.0 && options.kappa_theta < 1.0, "kappa_theta must be in (0, 1)");
  require(g.size() == b.dim() && start.size() == b.dim() && b_start.size() == b.dim(),
          "dimension mismatch");

  SubproblemSolution out;
  out.kind = StepKind::refined_arc;
  out.s = start;
  out.bs = b_start;

  auto certify = [&]() {
    const ArcConditionReport rep = check_arc_conditions(g, sigma, out.s, out.bs,
                                                        options.kappa_theta);
    out.residual_norm = rep.grad_norm_ratio * g.norm();
    out.conditions_met = rep.satisfied();
    return out.conditions_met;
  };

  if (!certify()) {
    Vector prev_s;
    Vector prev_grad;
    for (std::size_t it = 0; it < options.max_iter; ++it) {
      normalize_on_ray(g, sigma, out.s, out.bs);
      if (certify()) break;

      const double snorm = out.s.norm();
      const Vector grad = g + out.bs + sigma * snorm * out.s;
      const Vector d = -grad;
      const Vector bd = b.apply(d);
      ++out.hvp_count;

      // First trial step: Barzilai-Borwein when the last pair has positive
      // curvature, otherwise the inverse curvature of p along d.
      const double dd = d.squaredNorm();
      double eta = 0.0;
      if (prev_s.size() > 0) {
        const Vector ds = out.s - prev_s;
        const Vector dg = grad - prev_grad;
        const double curv = ds.dot(dg);
        if (curv > 0.0) eta = ds.squaredNorm() / curv;
      }
      if (!(eta > 0.0)) {
        const double curv = std::abs(d.dot(bd)) / dd + 2.0 * sigma * snorm + sigma * std::sqrt(dd);
        eta = 1.0 / curv;
      }

      const double base = cubic_value(g, sigma, out.s, out.bs);
      const double slope = grad.dot(d);
      bool moved = false;
      for (int trial = 0; trial < 60; ++trial) {
        const Vector s_try = out.s + eta * d;
        const Vector bs_try = out.bs + eta * bd;
        if (cubic_value(g, sigma, s_try, bs_try) <= base + 1e-4 * eta * slope) {
          prev_s = out.s;
          prev_grad = grad;
          out.s = s_try;
          out.bs = bs_try;
          moved = true;
          break;
        }
        eta *= 0.5;
      }
      if (!moved) break;
      if (it + 1 == options.max_iter) out.max_iter_hit = true;
    }
    normalize_on_ray(g, sigma, out.s, out.bs);
    certify();
  }
  out.predicted_decrease = cubic_decrease(g, out.s, out.bs, sigma);
  return out;
}

LanczosResult lanczos_min_eig(const SymmetricOperator& b, double tol, std::size_t max_iter,
                              Rng& rng) {
  require(tol > 0.0, "Lanczos tolerance must be positive");
  const Eigen::Index d = b.dim();
  require(d >= 1, "operator has no dimension");
  const auto steps = static_cast<Eigen::Index>(max_iter == 0 ? static_cast<std::size_t>(d)
                                                             : std::min<std::size_t>(max_iter, d));

  Matrix q(d, steps);
  Vector alpha(steps);
  Vector beta(steps);
  Vector v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = rng.normal();
  q.col(0) = v.normalized();

  LanczosResult out;
  double scale = 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> tri;
  Eigen::Index k = 0;
  for (; k < steps; ++k) {
    Vector w = b.apply(q.col(k));
    ++out.hvp_count;
    alpha[k] = q.col(k).dot(w);
    scale = std::max(scale, std::abs(alpha[k]));
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      w -= q.leftCols(k + 1) * (q.leftCols(k + 1).transpose() * w);
    }
    beta[k] = w.norm();
    scale = std::max(scale, beta[k]);

    tri.computeFromTridiagonal(alpha.head(k + 1), beta.head(k), Eigen::ComputeEigenvectors);
    const Vector y = tri.eigenvectors().col(0);
    out.lambda_min_est = tri.eigenvalues()[0];
    out.residual = beta[k] * std::abs(y[k]);
    const bool invariant = beta[k] <= 1e-14 * std::max(1.0, scale);
    if (out.residual <= tol || invariant) {
      out.converged = true;
      out.direction = (q.leftCols(k + 1) * y).normalized();
      return out;
    }
    if (k + 1 < steps) q.col(k + 1) = w / beta[k];
  }
  const Vector y = tri.eigenvectors().col(0);
  out.direction = (q.leftCols(steps) * y).normalized();
  return out;
}

Vector negative_curvature_step(const Vector& v, double radius, const Vector& g) {
  require(v.size() == g.size(), "dimension mismatch");
  require(radius > 0.0, "radius must be positive");
  return g.dot(v) > 0.0 ? Vector(-radius * v) : Vector(radius * v);
}

SubproblemSolution negative_curvature_solution_tr(const Vector& g, const SymmetricOperator& b,
                                                  const Vector& v, double radius) {
  SubproblemSolution out;
  out.kind = StepKind::neg_curv;
  const Vector bv = b.apply(v);
  out.hvp_count = 1;
  const double sign = g.dot(v) > 0.0 ? -1.0 : 1.0;
  out.s = sign * radius * v;
  out.bs = sign * radius * bv;
  out.boundary_hit = true;
  out.predicted_decrease = quadratic_decrease(g, out.s, out.bs);
  return out;
}

SubproblemSolution negative_curvature_solution_arc(const Vector& g, const SymmetricOperator& b,
                                                   const Vector& v, double sigma,
                                                   const RefineOptions& options) {
  Vector s = v;
  Vector bs = b.apply(v);
  normalize_on_ray(g, sigma, s, bs);
  SubproblemSolution out = refine_arc(g, b, sigma, s, bs, options);
  out.hvp_count += 1;
  out.kind = StepKind::neg_curv;
  return out;
}

}  // namespace sso
