#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sso/models.hpp"
#include "sso/problems.hpp"
#include "sso/sampling.hpp"
#include "sso/solvers.hpp"

namespace sso {

enum class Algorithm { str, sarc };

/// Which quantities are subsampled:
///   full: none; sh: Hessian; shg: Hessian + gradient; shgf: all three.
enum class Variant { full, sh, shg, shgf };

/// How the subsampled set sizes are chosen (fixed for the whole run).
///   fraction:  ceil(sample_fraction * n) for every subsampled set
///   theorem:   |S_h| = min{n, max{H1/eps_g, H2/eps_b}}, the others by fraction
///   bernstein: concentration sizes for S_g, S_B and S_h with estimated bounds
enum class SizeRule { fraction, theorem, bernstein };

enum class TrSolver { steihaug, cauchy };

enum class Termination { grad_and_curvature, max_iters, stalled, budget };

const char* to_string(Algorithm a);
const char* to_string(Variant v);
const char* to_string(SizeRule r);
const char* to_string(Termination t);
const char* to_string(SarcCorrection c);
Algorithm parse_algorithm(const std::string& s);
Variant parse_variant(const std::string& s);
SizeRule parse_size_rule(const std::string& s);
SarcCorrection parse_sarc_correction(const std::string& s);

struct VariantConfig {
  Algorithm algorithm = Algorithm::str;
  Variant variant = Variant::full;
  double eta = 0.1;
  double r1 = 0.5;
  double r2 = 2.0;
  double delta0 = 8.0;
  double delta_max = 100.0;
  double sigma0 = 1.0;
  double sigma_min = 1e-4;
  InexactnessBudget budget;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  SizeRule size_rule = SizeRule::fraction;
  double sample_fraction = 0.05;
  SarcCorrection sarc_correction = SarcCorrection::sigma;
  TrSolver tr_solver = TrSolver::steihaug;
  RefineOptions refine;
  double lanczos_tol = 1e-6;
  std::uint64_t max_props = 0;  // 0: unlimited

  void validate() const;
};

/// Tolerances (eps_g, eps_b, eps_h) consistent with the radius / sigma bound
/// lemmas for the given targets and eta, solved as equalities:
///   trust region: eps_g = c (eps_grad - eps_g), c = (1-eta)/16;
///                 eps_b = eps_h = c' (eps_hess - eps_b), c' = (1-eta)/10
///   cubic:        c = (1-eta)/220, c' = (1-eta)/36
InexactnessBudget lemma_tolerances(Algorithm algorithm, double eps_grad_target,
                                   double eps_hess_target, double eta);

/// True iff ||g|| <= eps_grad_target + eps_g and lambda_min(B) >= -(eps_hess_target - eps_b).
/// Under the approximation assumption this certifies ||grad f|| <= eps_grad + 2 eps_g
/// and lambda_min(hess f) >= -eps_hess - v0 eps_b.
bool check_termination(double g_norm, double lambda_min_est, const InexactnessBudget& budget);

/// The kappa_s constant bounding ||g(x_{k+1})|| <= kappa_s ||s_k||^2 for
/// condition-certified cubic steps.
double lemma_kappa_s(double eps_b, double eps_g, double lip_hess, double sigma, double kappa_theta,
                     double lip_grad, double theta, double zeta1, double zeta2);

struct IterationRecord {
  std::size_t iter = 0;
  std::uint64_t props = 0;
  std::uint64_t cum_props = 0;
  std::size_t gamma = 0;
  SampleSizes sizes;
  bool coupled = false;
  double rho_tilde = 0.0;
  double rho_hat = 0.0;
  bool accepted = false;
  bool terminal = false;         // termination test passed, no step taken
  double delta_or_sigma = 0.0;   // value used for this iteration's subproblem
  double step_norm = 0.0;
  double g_norm = 0.0;
  double model_decrease = 0.0;
  StepKind step_kind = StepKind::cauchy_tr;
  bool conditions_met = false;
  double train_loss = 0.0;
  std::optional<double> test_error;
  double wall_ms = 0.0;
};

struct RunTrace {
  std::vector<IterationRecord> records;  // records[0] describes x0
  Vector x_final;
  Termination termination = Termination::max_iters;
  SampleSizes subsample_sizes;  // sizes used for the subsampled sets
  std::vector<SampleSets> sets; // only filled when RunHooks::keep_sets
};

struct RunHooks {
  std::function<double(const Vector&)> test_error;  // optional
  bool record_train_loss = true;
  bool record_wall_time = false;
  bool keep_sets = false;
  /// Called after every iteration with the step that was tried.
  std::function<void(const IterationRecord&, const Vector& x_before, const Vector& step)> observer;
};

/// Fixed subsampled-set sizes for a run (before the variant decides which
/// sets are subsampled at all).
SampleSizes resolve_sample_sizes(const FiniteSumProblem& problem, const Vector& x0,
                                 const VariantConfig& config);

/// Sizes actually used for each set under the variant.
SampleSizes variant_sizes(Variant variant, std::size_t n, const SampleSizes& subsampled);

RunTrace run_str(const FiniteSumProblem& problem, const Vector& x0, const VariantConfig& config,
                 const RunHooks& hooks = {});
RunTrace run_sarc(const FiniteSumProblem& problem, const Vector& x0, const VariantConfig& config,
                  const RunHooks& hooks = {});
/// Dispatches on config.algorithm.
RunTrace run(const FiniteSumProblem& problem, const Vector& x0, const VariantConfig& config,
             const RunHooks& hooks = {});

}  // namespace sso
