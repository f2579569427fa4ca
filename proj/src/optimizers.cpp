#include "sso/optimizers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sso/accounting.hpp"
#include "sso/error.hpp"

namespace sso {

const char* to_string(Algorithm a) { return a == Algorithm::str ? "str" : "sarc"; }

const char* to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::sh: return "sh";
    case Variant::shg: return "shg";
    case Variant::shgf: return "shgf";
  }
  return "unknown";
}

const char* to_string(SizeRule r) {
  switch (r) {
    case SizeRule::fraction: return "fraction";
    case SizeRule::theorem: return "theorem";
    case SizeRule::bernstein: return "bernstein";
  }
  return "unknown";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::grad_and_curvature: return "grad_and_curvature";
    case Termination::max_iters: return "max_iters";
    case Termination::stalled: return "stalled";
    case Termination::budget: return "budget";
  }
  return "unknown";
}

const char* to_string(SarcCorrection c) { return c == SarcCorrection::sigma ? "sigma" : "step"; }

Algorithm parse_algorithm(const std::string& s) {
  if (s == "str" || s == "tr") return Algorithm::str;
  if (s == "sarc" || s == "arc") return Algorithm::sarc;
  throw ContractViolation("unknown algorithm '" + s + "'");
}

Variant parse_variant(const std::string& s) {
  if (s == "full") return Variant::full;
  if (s == "sh") return Variant::sh;
  if (s == "shg") return Variant::shg;
  if (s == "shgf") return Variant::shgf;
  throw ContractViolation("unknown variant '" + s + "'");
}

SizeRule parse_size_rule(const std::string& s) {
  if (s == "fraction") return SizeRule::fraction;
  if (s == "theorem") return SizeRule::theorem;
  if (s == "bernstein") return SizeRule::bernstein;
  throw ContractViolation("unknown size rule '" + s + "'");
}

SarcCorrection parse_sarc_correction(const std::string& s) {
  if (s == "sigma") return SarcCorrection::sigma;
  if (s == "step") return SarcCorrection::step;
  throw ContractViolation("unknown sarc correction '" + s + "'");
}

void VariantConfig::validate() const {
  require(eta > 0.0 && eta < 1.0, "eta must be in (0, 1)");
  require(r1 > 0.0 && r1 < 1.0, "r1 must be in (0, 1)");
  require(r2 >= 1.0, "r2 must be >= 1");
  if (algorithm == Algorithm::str) {
    require(delta0 > 0.0 && delta0 <= delta_max, "need 0 < delta0 <= delta_max");
  } else {
    require(sigma_min > 0.0 && sigma0 >= sigma_min, "need sigma0 >= sigma_min > 0");
  }
  require(sample_fraction > 0.0 && sample_fraction <= 1.0, "sample fraction must be in (0, 1]");
  require(lanczos_tol > 0.0, "lanczos tolerance must be positive");
  budget.validate();
}

InexactnessBudget lemma_tolerances(Algorithm algorithm, double eps_grad_target,
                                   double eps_hess_target, double eta) {
  require(eps_grad_target > 0.0 && eps_hess_target > 0.0, "targets must be positive");
  require(eta > 0.0 && eta < 1.0, "eta must be in (0, 1)");
  const double cg = algorithm == Algorithm::str ? (1.0 - eta) / 16.0 : (1.0 - eta) / 220.0;
  const double cb = algorithm == Algorithm::str ? (1.0 - eta) / 10.0 : (1.0 - eta) / 36.0;
  InexactnessBudget b;
  b.eps_grad_target = eps_grad_target;
  b.eps_hess_target = eps_hess_target;
  b.eps_g = cg * eps_grad_target / (1.0 + cg);
  b.eps_b = cb * eps_hess_target / (1.0 + cb);
  b.eps_h = b.eps_b;
  return b;
}

bool check_termination(double g_norm, double lambda_min_est, const InexactnessBudget& budget) {
  return g_norm <= budget.eps_grad_target + budget.eps_g &&
         lambda_min_est >= -(budget.eps_hess_target - budget.eps_b);
}

double lemma_kappa_s(double eps_b, double eps_g, double lip_hess, double sigma, double kappa_theta,
                     double lip_grad, double theta, double zeta1, double zeta2) {
  require(theta >= 0.0 && theta < 1.0, "theta must be in [0, 1)");
  const double first = (2.0 * eps_b + (lip_hess + sigma) + 2.0 * kappa_theta * eps_g +
                        kappa_theta * lip_grad) /
                       (1.0 - theta);
  const double denom = 1.0 - theta - zeta1 - zeta2;
  if (denom <= 0.0) return first;
  return std::min(first, (lip_hess + sigma + kappa_theta * lip_grad) / denom);
}

namespace {

std::size_t fraction_size(std::size_t n, double fraction) {
  const auto size = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(size, 1, n);
}

std::size_t cap(std::uint64_t count, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::uint64_t>(count, 1, n));
}

// Per-sample magnitude estimates at x0, each with a safety factor of 2.
struct MagnitudeEstimates {
  double kappa_f = 0.0;
  double kappa_grad = 0.0;
  double kappa_hess = 0.0;
};

MagnitudeEstimates estimate_magnitudes(const FiniteSumProblem& problem, const Vector& x0,
                                       std::uint64_t seed) {
  constexpr std::size_t kMaxHessianProbes = 2000;
  MagnitudeEstimates m;
  const std::size_t n = problem.num_samples();
  for (std::size_t i = 0; i < n; ++i) {
    m.kappa_f = std::max(m.kappa_f, std::abs(problem.value(i, x0)));
    m.kappa_grad = std::max(m.kappa_grad, problem.grad(i, x0).norm());
  }
  Rng rng(seed);
  const IndexSet probes = draw_index_set(rng, n, std::min(n, kMaxHessianProbes));
  for (std::size_t i : probes) {
    const SymmetricOperator hi(problem.dim(), [&problem, i, &x0](const Vector& v) -> Vector {
      return problem.hvp(i, x0, v);
    });
    m.kappa_hess = std::max(m.kappa_hess, estimate_operator_norm(hi, rng, 10, 1.0).norm);
  }
  m.kappa_f *= 2.0;
  m.kappa_grad *= 2.0;
  m.kappa_hess *= 2.0;
  return m;
}

}  // namespace

SampleSizes resolve_sample_sizes(const FiniteSumProblem& problem, const Vector& x0,
                                 const VariantConfig& config) {
  const std::size_t n = problem.num_samples();
  const std::size_t by_fraction = fraction_size(n, config.sample_fraction);
  SampleSizes sizes{by_fraction, by_fraction, by_fraction};
  const InexactnessBudget& b = config.budget;
  switch (config.size_rule) {
    case SizeRule::fraction:
      break;
    case SizeRule::theorem: {
      VarianceOptions opts;
      opts.max_samples = 5000;
      opts.seed = derive_seed(config.seed, 7);
      const Vector probes[] = {x0};
      const VarianceBounds vb = estimate_variance_bounds(problem, probes, opts);
      sizes.h = theorem_sample_size(n, vb.h1, vb.h2, b.eps_g, b.eps_b);
      break;
    }
    case SizeRule::bernstein: {
      const MagnitudeEstimates m = estimate_magnitudes(problem, x0, derive_seed(config.seed, 8));
      const double delta0 = per_iteration_delta(b.delta, std::max<std::size_t>(1, config.max_iters));
      const Eigen::Index d = problem.dim();
      const double dc = function_size_delta_c(config.delta_max, config.sigma_min);
      sizes.g = cap(gradient_sample_size(d, delta0, std::max(m.kappa_grad, 1e-300), b.eps_g), n);
      sizes.b = cap(hessian_sample_size(d, delta0, std::max(m.kappa_hess, 1e-300), b.eps_b, b.v0), n);
      sizes.h = cap(function_sample_size(d, delta0, std::max(m.kappa_f, 1e-300), b.eps_h, dc), n);
      break;
    }
  }
  return sizes;
}

SampleSizes variant_sizes(Variant variant, std::size_t n, const SampleSizes& subsampled) {
  switch (variant) {
    case Variant::full: return {n, n, n};
    case Variant::sh: return {n, n, subsampled.b};
    case Variant::shg: return {n, subsampled.g, subsampled.b};
    case Variant::shgf: return subsampled;
  }
  return {n, n, n};
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

IndexSet draw_or_all(Rng& rng, std::size_t n, std::size_t size) {
  return size == n ? all_indices(n) : draw_index_set(rng, n, size);
}

RunTrace run_impl(const FiniteSumProblem& problem, const Vector& x0, const VariantConfig& config,
                  const RunHooks& hooks) {
  config.validate();
  require(x0.size() == problem.dim(), "x0 has wrong dimension");
  const bool tr = config.algorithm == Algorithm::str;
  const std::size_t n = problem.num_samples();
  const InexactnessBudget& budget = config.budget;

  RunTrace trace;
  trace.subsample_sizes = resolve_sample_sizes(problem, x0, config);
  const SampleSizes sizes = variant_sizes(config.variant, n, trace.subsample_sizes);

  Rng sampler(derive_seed(config.seed, 1));
  Rng aux(derive_seed(config.seed, 2));
  PropCounter counter;

  Vector x = x0;
  double param = tr ? config.delta0 : config.sigma0;

  auto telemetry = [&](IterationRecord& rec) {
    if (hooks.record_train_loss) rec.train_loss = full_value(problem, x);
    if (hooks.test_error) rec.test_error = hooks.test_error(x);
  };

  {
    IterationRecord first;
    first.delta_or_sigma = param;
    first.rho_tilde = first.rho_hat = std::nan("");
    first.step_kind = tr ? StepKind::steihaug : StepKind::refined_arc;
    telemetry(first);
    trace.records.push_back(first);
  }

  trace.termination = Termination::max_iters;
  for (std::size_t k = 1; k <= config.max_iters; ++k) {
    const auto start = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iter = k;
    rec.delta_or_sigma = param;

    SampleSets sets;
    sets.s_g = draw_or_all(sampler, n, sizes.g);
    sets.s_b = draw_or_all(sampler, n, sizes.b);
    const Vector g = problem.mean_grad(sets.s_g, x);
    const SymmetricOperator b = problem.mean_hessian(sets.s_b, x);
    rec.g_norm = g.norm();
    const bool small_gradient = rec.g_norm <= budget.eps_grad_target + budget.eps_g;

    std::size_t gamma = 0;
    SubproblemSolution sol;
    bool terminal = false;
    if (small_gradient) {
      const LanczosResult lz = lanczos_min_eig(b, config.lanczos_tol, 0, aux);
      gamma += lz.hvp_count;
      if (check_termination(rec.g_norm, lz.lambda_min_est, budget)) {
        terminal = true;
      } else if (lz.lambda_min_est < -(budget.eps_hess_target - budget.eps_b)) {
        sol = tr ? negative_curvature_solution_tr(g, b, lz.direction, param)
                 : negative_curvature_solution_arc(g, b, lz.direction, param, config.refine);
      }
    }
    if (!terminal && (!small_gradient || sol.s.size() == 0)) {
      if (tr) {
        sol = config.tr_solver == TrSolver::steihaug
                  ? steihaug_cg(g, b, param, std::max(steihaug_default_tol(g), 1e-300),
                                2 * static_cast<std::size_t>(problem.dim()))
                  : cauchy_point_tr(g, b, param);
      } else {
        const NormEstimate norm = estimate_operator_norm(b, aux);
        gamma += norm.hvp_count;
        const SubproblemSolution cauchy = cauchy_step_arc(g, b, norm.norm, param);
        gamma += cauchy.hvp_count;
        sol = refine_arc(g, b, param, cauchy.s, cauchy.bs, config.refine);
      }
    }
    gamma += sol.hvp_count;

    if (terminal) {
      const SampleSizes charged{0, sets.s_g.size(), sets.s_b.size()};
      const std::uint64_t props = PropCounter::quote(charged, gamma);
      if (config.max_props != 0 && counter.total() + props > config.max_props) {
        trace.termination = Termination::budget;
        break;
      }
      rec.props = counter.charge(charged, gamma);
      rec.cum_props = counter.total();
      rec.sizes = charged;
      rec.gamma = gamma;
      rec.terminal = true;
      rec.rho_tilde = rec.rho_hat = std::nan("");
      telemetry(rec);
      if (hooks.record_wall_time) rec.wall_ms = elapsed_ms(start);
      if (hooks.keep_sets) trace.sets.push_back(sets);
      trace.records.push_back(rec);
      trace.termination = Termination::grad_and_curvature;
      break;
    }

    // Function-estimate set: only SHGF subsamples it, and it reuses S_g when
    // the gradient is already small.
    if (config.variant == Variant::shgf && small_gradient) {
      sets.s_h = sets.s_g;
      sets.coupled = true;
    } else {
      sets.s_h = draw_or_all(sampler, n, sizes.h);
    }
    const Vector x_trial = x + sol.s;
    const double h_x = problem.mean_value(sets.s_h, x);
    const double h_xs = problem.mean_value(sets.s_h, x_trial);
    const double step_norm = sol.s.norm();
    const RatioReport ratio =
        tr ? ratio_str(sol.predicted_decrease, h_x, h_xs, step_norm, budget.eps_h)
           : ratio_sarc(sol.predicted_decrease, h_x, h_xs, step_norm, budget.eps_h, param,
                        config.sarc_correction);

    const SampleSizes charged{sets.s_h.size(), sets.s_g.size(), sets.s_b.size()};
    const std::uint64_t props = PropCounter::quote(charged, gamma);
    if (config.max_props != 0 && counter.total() + props > config.max_props) {
      trace.termination = Termination::budget;
      break;
    }
    rec.props = counter.charge(charged, gamma);
    rec.cum_props = counter.total();
    rec.sizes = charged;
    rec.gamma = gamma;
    rec.coupled = sets.coupled;
    rec.rho_tilde = ratio.rho_tilde;
    rec.rho_hat = ratio.rho_hat;
    rec.model_decrease = ratio.model_decrease;
    rec.step_norm = step_norm;
    rec.step_kind = sol.kind;
    rec.conditions_met = sol.conditions_met;
    rec.accepted = !ratio.degenerate && ratio.rho_hat >= config.eta;

    const Vector x_before = x;
    if (rec.accepted) x = x_trial;
    if (tr) {
      param = rec.accepted ? std::min(config.delta_max, config.r2 * param) : config.r1 * param;
    } else {
      param = rec.accepted ? std::max(config.sigma_min, config.r1 * param) : config.r2 * param;
    }

    telemetry(rec);
    if (hooks.record_wall_time) rec.wall_ms = elapsed_ms(start);
    if (hooks.keep_sets) trace.sets.push_back(sets);
    trace.records.push_back(rec);
    if (hooks.observer) hooks.observer(rec, x_before, sol.s);

    if ((tr && param < 1e-16) || (!tr && param > 1e16)) {
      trace.termination = Termination::stalled;
      break;
    }
  }
  trace.x_final = x;
  return trace;
}

}  // namespace

RunTrace run_str(const FiniteSumProblem& problem, const Vector& x0, const VariantConfig& config,
                 const RunHooks& hooks) {
  require(config.algorithm == Algorithm::str, "run_str needs algorithm = str");
  return run_impl(problem, x0, config, hooks);
}

RunTrace run_sarc(const FiniteSumProblem& problem, const Vector& x0, const VariantConfig& config,
                  const RunHooks& hooks) {
  require(config.algorithm == Algorithm::sarc, "run_sarc needs algorithm = sarc");
  return run_impl(problem, x0, config, hooks);
}

RunTrace run(const FiniteSumProblem& problem, const Vector& x0, const VariantConfig& config,
             const RunHooks& hooks) {
  return run_impl(problem, x0, config, hooks);
}

}  // namespace sso
