#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sso/data_io.hpp"
#include "sso/optimizers.hpp"

namespace sso {

inline constexpr int kTraceSchemaVersion = 1;

/// Seeded synthetic stand-in for a LIBSVM binary set.
struct SyntheticSpec {
  std::size_t n = 20000;
  Eigen::Index d = 123;
  double density = 0.11;
  double label_noise = 0.1;
  std::uint64_t seed = 0;
  std::size_t test_rows = 0;  // split off the tail as a test set
};

struct ExperimentSpec {
  std::string dataset;       // LIBSVM path (ignored when synthetic is set)
  std::string test_dataset;  // optional
  std::optional<SyntheticSpec> synthetic;
  std::vector<Algorithm> algorithms{Algorithm::str};
  std::vector<Variant> variants{Variant::full};
  std::vector<double> fractions{0.05};
  std::vector<double> delta0s{8.0};
  std::vector<double> sigma0s{1.0};
  std::vector<std::uint64_t> seeds{0};
  VariantConfig base;  // everything not swept
  bool lemma_tolerances = false;
  std::string out_dir = "sso_out";
  std::size_t jobs = 1;
  bool timing = false;
};

struct GridPoint {
  Algorithm algorithm;
  Variant variant;
  double fraction;
  double param;  // delta0 for str, sigma0 for sarc
  std::uint64_t seed;
};

/// Cartesian product in a fixed order: algorithm, variant, fraction, param, seed.
std::vector<GridPoint> expand_grid(const ExperimentSpec& spec);

/// {dataset}_{algo}_{variant}_f{fraction}_p{param}_s{seed}.csv
std::string trace_file_name(const std::string& dataset, const GridPoint& point);

VariantConfig config_for(const ExperimentSpec& spec, const GridPoint& point);

/// Uniform in [-1, 1]^d from the run seed.
Vector initial_point(Eigen::Index d, std::uint64_t seed);

struct LoadedData {
  std::string name;
  std::shared_ptr<const SparseRowMatrix> train_features;
  Vector train_labels;
  std::optional<Dataset> test;
};

/// Loads (or synthesises) the train and test sets with aligned dimensions.
LoadedData load_experiment_data(const ExperimentSpec& spec);

struct TraceMeta {
  std::string dataset;
  GridPoint point;
};

/// Run CSV: a '# sso-trace schema_version=...' line, a header, one row per
/// record. The test_error column is present only when `has_test`.
void write_trace_csv(std::ostream& os, const RunTrace& trace, const TraceMeta& meta, bool has_test);

struct RunSummary {
  GridPoint point;
  std::string file;
  std::size_t iterations = 0;
  std::uint64_t final_cum_props = 0;
  double final_train_loss = 0.0;
  std::optional<double> final_test_error;
  Termination termination = Termination::max_iters;
  std::string error;  // non-empty when the run failed
};

/// Runs every grid point, writes one CSV per run into out_dir and then
/// summary.csv. Runs that throw are reported in the summary and skipped.
std::vector<RunSummary> run_experiment(const ExperimentSpec& spec);

enum class PlotMetric { train_loss, test_error };
PlotMetric parse_plot_metric(const std::string& s);

/// Long-format (variant, algorithm, seed, cum_props, value) rows from run
/// CSVs. Keeps every `stride`-th row of each run plus its first and last.
/// Refuses runs from different datasets and runs without the metric column.
void emit_plot_data(const std::vector<std::string>& csv_files, PlotMetric metric,
                    std::size_t stride, std::ostream& os);

}  // namespace sso
