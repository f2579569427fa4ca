#include "sso/sampling.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "sso/error.hpp"

namespace sso {

void InexactnessBudget::validate() const {
  require(eps_g >= 0.0 && eps_b >= 0.0 && eps_h >= 0.0, "tolerances must be nonnegative");
  require(eps_grad_target > eps_g, "eps_grad_target must exceed eps_g");
  require(eps_hess_target > eps_b, "eps_hess_target must exceed eps_b");
  require(v0 > 0.0 && v0 <= 1.0, "v0 must be in (0, 1]");
  require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
}

double per_iteration_delta(double delta, std::size_t iterations) {
  require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
  require(iterations >= 1, "iteration budget must be >= 1");
  if (iterations == 1) return delta;
  return -std::expm1(std::log1p(-delta) / static_cast<double>(iterations));
}

std::uint64_t ceil_count(double bound) {
  require(bound >= 0.0 && !std::isnan(bound), "sample bound must be nonnegative");
  if (bound >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  const double nearest = std::round(bound);
  if (std::abs(bound - nearest) <= 1e-9 * std::max(1.0, bound)) {
    return static_cast<std::uint64_t>(nearest);
  }
  return static_cast<std::uint64_t>(std::ceil(bound));
}

namespace {

double log_factor(Eigen::Index d, double delta0) {
  require(d >= 1, "dimension must be positive");
  require(delta0 > 0.0 && delta0 < 1.0, "delta0 must be in (0, 1)");
  return std::log(2.0 * static_cast<double>(d) / delta0);
}

}  // namespace

double gradient_sample_bound(Eigen::Index d, double delta0, double lip_grad_bound, double eps_g) {
  require(lip_grad_bound > 0.0 && eps_g > 0.0, "gradient bound and eps_g must be positive");
  return 16.0 * log_factor(d, delta0) * lip_grad_bound * lip_grad_bound / (eps_g * eps_g);
}

std::uint64_t gradient_sample_size(Eigen::Index d, double delta0, double lip_grad_bound,
                                   double eps_g) {
  return ceil_count(gradient_sample_bound(d, delta0, lip_grad_bound, eps_g));
}

double hessian_sample_bound(Eigen::Index d, double delta0, double lip_hess_bound, double eps_b,
                            double v0) {
  require(lip_hess_bound > 0.0 && eps_b > 0.0, "Hessian bound and eps_b must be positive");
  require(v0 > 0.0 && v0 <= 1.0, "v0 must be in (0, 1]");
  return 16.0 * lip_hess_bound * lip_hess_bound * log_factor(d, delta0) / (v0 * v0 * eps_b * eps_b);
}

std::uint64_t hessian_sample_size(Eigen::Index d, double delta0, double lip_hess_bound,
                                  double eps_b, double v0) {
  return ceil_count(hessian_sample_bound(d, delta0, lip_hess_bound, eps_b, v0));
}

double function_size_delta_c(double delta_max, double sigma_min) {
  require(delta_max > 0.0 && sigma_min > 0.0, "delta_max and sigma_min must be positive");
  const double inv = 1.0 / sigma_min;
  return std::sqrt(std::max(delta_max * delta_max, inv * inv));
}

double function_sample_bound(Eigen::Index d, double delta0, double kappa_f, double eps_h,
                             double delta_c) {
  require(kappa_f > 0.0 && eps_h > 0.0 && delta_c > 0.0,
          "kappa_f, eps_h and delta_c must be positive");
  const double dc2 = delta_c * delta_c;
  return 16.0 * kappa_f * kappa_f * log_factor(d, delta0) / (eps_h * eps_h * dc2 * dc2);
}

std::uint64_t function_sample_size(Eigen::Index d, double delta0, double kappa_f, double eps_h,
                                   double delta_c) {
  return ceil_count(function_sample_bound(d, delta0, kappa_f, eps_h, delta_c));
}

std::size_t theorem_sample_size(std::size_t n, double h1, double h2, double eps_g, double eps_b) {
  require(n >= 1, "n must be positive");
  require(h1 >= 0.0 && h2 >= 0.0, "variance bounds must be nonnegative");
  require(eps_g > 0.0 && eps_b > 0.0, "eps_g and eps_b must be positive");
  const double raw = std::max(h1 / eps_g, h2 / eps_b);
  const std::uint64_t count = std::max<std::uint64_t>(1, ceil_count(raw));
  return static_cast<std::size_t>(std::min<std::uint64_t>(count, n));
}

VarianceBounds estimate_variance_bounds(const FiniteSumProblem& problem,
                                        std::span<const Vector> probes,
                                        const VarianceOptions& options) {
  require(!probes.empty(), "need at least one probe point");
  const std::size_t n = problem.num_samples();
  const Eigen::Index d = problem.dim();
  Rng rng(options.seed);
  const IndexSet samples = (options.max_samples == 0 || options.max_samples >= n)
                               ? all_indices(n)
                               : draw_index_set(rng, n, options.max_samples);
  const auto count = static_cast<double>(samples.size());
  const bool dense = d <= options.dense_dim_limit;

  VarianceBounds out;
  out.h2_estimated = !dense;
  double h1_sq = 0.0;
  double h2_sq = 0.0;
  for (const Vector& x : probes) {
    const Vector mean_grad = full_grad(problem, x);
    double grad_dev = 0.0;
    for (std::size_t i : samples) grad_dev += (problem.grad(i, x) - mean_grad).squaredNorm();
    h1_sq = std::max(h1_sq, grad_dev / count);

    double hess_dev = 0.0;
    if (dense) {
      Matrix mean_hess = Matrix::Zero(d, d);
      const IndexSet all = all_indices(n);
      for (std::size_t i : all) mean_hess += problem.hessian(i, x);
      mean_hess /= static_cast<double>(n);
      for (std::size_t i : samples) {
        const Matrix dev = problem.hessian(i, x) - mean_hess;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(dev, Eigen::EigenvaluesOnly);
        const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
        hess_dev += norm * norm;
      }
    } else {
      const SymmetricOperator mean_hess = problem.mean_hessian(all_indices(n), x);
      std::vector<Vector> zs;
      std::vector<Vector> hzs;
      for (int k = 0; k < options.hutchinson_probes; ++k) {
        Vector z(d);
        for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.rademacher();
        hzs.push_back(mean_hess.apply(z));
        zs.push_back(std::move(z));
      }
      for (std::size_t i : samples) {
        double acc = 0.0;
        for (std::size_t k = 0; k < zs.size(); ++k) {
          acc += (problem.hvp(i, x, zs[k]) - hzs[k]).squaredNorm();
        }
        hess_dev += acc / static_cast<double>(zs.size());
      }
    }
    h2_sq = std::max(h2_sq, hess_dev / count);
  }
  out.h1 = std::sqrt(h1_sq);
  out.h2 = std::sqrt(h2_sq);
  return out;
}

IndexSet draw_index_set(Rng& rng, std::size_t n, std::size_t size) {
  require(size >= 1, "sample size must be >= 1");
  require(size <= n, "sample size exceeds population");
  if (size == n) return all_indices(n);
  // Floyd's algorithm: exactly `size` draws, uniform over all subsets.
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(size * 2);
  IndexSet out;
  out.reserve(size);
  for (std::size_t j = n - size; j < n; ++j) {
    const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SampleSets draw_sets(Rng& rng, std::size_t n, const SampleSizes& sizes, bool coupling_trigger) {
  SampleSets sets;
  sets.s_g = draw_index_set(rng, n, sizes.g);
  sets.s_b = draw_index_set(rng, n, sizes.b);
  if (coupling_trigger) {
    sets.s_h = sets.s_g;
    sets.coupled = true;
  } else {
    sets.s_h = draw_index_set(rng, n, sizes.h);
  }
  return sets;
}

}  // namespace sso
