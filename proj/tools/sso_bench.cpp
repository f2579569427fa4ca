#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sso/bench.hpp"
#include "sso/oracles.hpp"

namespace {

std::string resolve_data_path(const std::string& path) {
  if (path.empty() || std::filesystem::exists(path)) return path;
  if (const char* dir = std::getenv("SSO_DATA_DIR")) {
    const auto candidate = std::filesystem::path(dir) / path;
    if (std::filesystem::exists(candidate)) return candidate.string();
  }
  return path;
}

int self_check() {
  const auto rows = sso::run_self_check();
  bool all = true;
  std::printf("%-32s %10s %9s %12s  %s\n", "check", "instances", "failures", "worst_gap", "result");
  for (const auto& r : rows) {
    std::printf("%-32s %10zu %9zu %12.3e  %s\n", r.name.c_str(), r.instances, r.failures,
                r.worst_gap, r.passed() ? "PASS" : "FAIL");
    all = all && r.passed();
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subsampled trust-region and cubic-regularization benchmark runner"};
  app.require_subcommand(0, 1);
  bool self_check_flag = false;
  app.add_flag("--self-check", self_check_flag, "Run the oracle battery and exit");

  sso::ExperimentSpec spec;
  std::vector<std::string> algos{"str"};
  std::vector<std::string> variants{"full"};
  std::string size_rule = "fraction";
  std::string sarc_correction = "sigma";
  bool synthetic = false;
  sso::SyntheticSpec synth;
  std::uint64_t budget_props = 0;

  app.set_config("--config", "",
                 "key = value file, run options under a [run] section; command-line flags win");
  CLI::App* run = app.add_subcommand("run", "Run a variant grid and write CSV traces");
  run->add_option("--dataset", spec.dataset, "LIBSVM training file (.gz accepted); "
                                             "relative names are also looked up in $SSO_DATA_DIR");
  run->add_option("--test", spec.test_dataset, "LIBSVM test file");
  run->add_flag("--synthetic", synthetic, "Use seeded synthetic data instead of --dataset");
  run->add_option("--synthetic-n", synth.n, "Synthetic training rows")->capture_default_str();
  run->add_option("--synthetic-d", synth.d, "Synthetic dimension")->capture_default_str();
  run->add_option("--synthetic-test", synth.test_rows, "Synthetic test rows")->capture_default_str();
  run->add_option("--synthetic-seed", synth.seed, "Synthetic data seed")->capture_default_str();
  run->add_option("--algo", algos, "str and/or sarc")->capture_default_str();
  run->add_option("--variant", variants, "full, sh, shg, shgf")->capture_default_str();
  run->add_option("--fraction", spec.fractions, "Sample fractions")->capture_default_str();
  run->add_option("--delta0", spec.delta0s, "Initial radii (str)")->capture_default_str();
  run->add_option("--sigma0", spec.sigma0s, "Initial sigmas (sarc)")->capture_default_str();
  run->add_option("--seed", spec.seeds, "Run seeds")->capture_default_str();
  run->add_option("--eta", spec.base.eta)->capture_default_str();
  run->add_option("--r1", spec.base.r1)->capture_default_str();
  run->add_option("--r2", spec.base.r2)->capture_default_str();
  run->add_option("--delta-max", spec.base.delta_max)->capture_default_str();
  run->add_option("--sigma-min", spec.base.sigma_min)->capture_default_str();
  run->add_option("--eps-grad-target", spec.base.budget.eps_grad_target)->capture_default_str();
  run->add_option("--eps-hess-target", spec.base.budget.eps_hess_target)->capture_default_str();
  run->add_option("--eps-g", spec.base.budget.eps_g)->capture_default_str();
  run->add_option("--eps-b", spec.base.budget.eps_b)->capture_default_str();
  run->add_option("--eps-h", spec.base.budget.eps_h)->capture_default_str();
  run->add_option("--delta", spec.base.budget.delta, "Failure probability for size rules")
      ->capture_default_str();
  run->add_flag("--lemma-tolerances", spec.lemma_tolerances,
                "Derive eps_g, eps_b, eps_h from eta and the targets");
  run->add_option("--size-rule", size_rule, "fraction, theorem or bernstein")->capture_default_str();
  run->add_option("--sarc-correction", sarc_correction, "sigma or step")->capture_default_str();
  run->add_option("--max-iters", spec.base.max_iters)->capture_default_str();
  run->add_option("--budget-props", budget_props, "Propagation budget per run (0: none)")
      ->capture_default_str();
  run->add_option("--out", spec.out_dir, "Output directory")->capture_default_str();
  run->add_option("--jobs", spec.jobs, "Parallel runs")->capture_default_str();
  run->add_flag("--timing", spec.timing, "Record wall_ms (makes output non-reproducible)");

  std::vector<std::string> plot_files;
  std::string metric = "train_loss";
  std::size_t stride = 1;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plot-data", "Long-format plot data from run CSVs");
  plot->add_option("files", plot_files, "Run CSV files")->required();
  plot->add_option("--metric", metric, "train_loss or test_error")->capture_default_str();
  plot->add_option("--downsample", stride, "Keep every k-th row (first/last always kept)")
      ->capture_default_str();
  plot->add_option("--out", plot_out, "Output file (default stdout)");

  CLI::App* check = app.add_subcommand("self-check", "Run the oracle battery");

  CLI11_PARSE(app, argc, argv);

  try {
    if (self_check_flag || check->parsed()) return self_check();
    if (run->parsed()) {
      spec.algorithms.clear();
      for (const auto& a : algos) spec.algorithms.push_back(sso::parse_algorithm(a));
      spec.variants.clear();
      for (const auto& v : variants) spec.variants.push_back(sso::parse_variant(v));
      spec.base.size_rule = sso::parse_size_rule(size_rule);
      spec.base.sarc_correction = sso::parse_sarc_correction(sarc_correction);
      spec.base.max_props = budget_props;
      if (synthetic) {
        spec.synthetic = synth;
      } else if (spec.dataset.empty()) {
        std::cerr << "error: --dataset or --synthetic is required\n";
        return 2;
      }
      spec.dataset = resolve_data_path(spec.dataset);
      spec.test_dataset = resolve_data_path(spec.test_dataset);
      const auto summaries = sso::run_experiment(spec);
      int failed = 0;
      for (const auto& s : summaries) {
        if (!s.error.empty()) {
          std::cerr << s.file << ": " << s.error << "\n";
          ++failed;
        }
      }
      std::cout << summaries.size() - failed << " of " << summaries.size() << " runs written to "
                << spec.out_dir << "\n";
      return failed == 0 ? 0 : 1;
    }
    if (plot->parsed()) {
      const auto m = sso::parse_plot_metric(metric);
      if (plot_out.empty()) {
        sso::emit_plot_data(plot_files, m, stride, std::cout);
      } else {
        std::ofstream os(plot_out);
        if (!os) throw std::runtime_error("cannot write " + plot_out);
        sso::emit_plot_data(plot_files, m, stride, os);
      }
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
