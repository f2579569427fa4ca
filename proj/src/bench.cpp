#include "sso/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "sso/error.hpp"

namespace sso {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
  require(!spec.algorithms.empty() && !spec.variants.empty() && !spec.fractions.empty() &&
              !spec.seeds.empty(),
          "experiment grid has an empty axis");
  std::vector<GridPoint> points;
  for (Algorithm a : spec.algorithms) {
    const auto& params = a == Algorithm::str ? spec.delta0s : spec.sigma0s;
    require(!params.empty(), "experiment grid has no delta0/sigma0 values");
    for (Variant v : spec.variants)
      for (double f : spec.fractions)
        for (double p : params)
          for (std::uint64_t s : spec.seeds) points.push_back({a, v, f, p, s});
  }
  return points;
}

std::string trace_file_name(const std::string& dataset, const GridPoint& p) {
  return dataset + "_" + to_string(p.algorithm) + "_" + to_string(p.variant) + "_f" +
         short_num(p.fraction) + "_p" + short_num(p.param) + "_s" + std::to_string(p.seed) + ".csv";
}

VariantConfig config_for(const ExperimentSpec& spec, const GridPoint& p) {
  VariantConfig c = spec.base;
  c.algorithm = p.algorithm;
  c.variant = p.variant;
  c.sample_fraction = p.fraction;
  c.seed = p.seed;
  if (p.algorithm == Algorithm::str) {
    c.delta0 = p.param;
  } else {
    c.sigma0 = p.param;
  }
  if (spec.lemma_tolerances) {
    const InexactnessBudget derived = lemma_tolerances(
        p.algorithm, spec.base.budget.eps_grad_target, spec.base.budget.eps_hess_target, c.eta);
    c.budget.eps_g = derived.eps_g;
    c.budget.eps_b = derived.eps_b;
    c.budget.eps_h = derived.eps_h;
  }
  return c;
}

Vector initial_point(Eigen::Index d, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 3));
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = rng.uniform(-1.0, 1.0);
  return x;
}

LoadedData load_experiment_data(const ExperimentSpec& spec) {
  Dataset train;
  std::optional<Dataset> test;
  if (spec.synthetic) {
    const SyntheticSpec& s = *spec.synthetic;
    Dataset all = make_synthetic_binary(s.n + s.test_rows, s.d, s.density, s.label_noise, s.seed);
    all.name = "synthetic";
    if (s.test_rows > 0) {
      auto [tr, te] = split_tail(all, s.test_rows);
      train = std::move(tr);
      test = std::move(te);
    } else {
      train = std::move(all);
    }
  } else {
    require(!spec.dataset.empty(), "no dataset given");
    ParseOptions opts;
    opts.labels = LabelScheme::automatic;
    train = load_libsvm_file(spec.dataset, opts);
    if (!spec.test_dataset.empty()) {
      opts.split = Split::test;
      test = load_libsvm_file(spec.test_dataset, opts);
    }
  }
  if (test) align_dimensions(train, *test);
  LoadedData out;
  out.name = train.name;
  out.train_labels = train.labels;
  out.train_features = std::make_shared<const SparseRowMatrix>(std::move(train.features));
  out.test = std::move(test);
  return out;
}

void write_trace_csv(std::ostream& os, const RunTrace& trace, const TraceMeta& meta, bool has_test) {
  const GridPoint& p = meta.point;
  os << "# sso-trace schema_version=" << kTraceSchemaVersion << " dataset=" << meta.dataset
     << " algorithm=" << to_string(p.algorithm) << " variant=" << to_string(p.variant)
     << " fraction=" << short_num(p.fraction) << " param=" << short_num(p.param)
     << " seed=" << p.seed << " termination=" << to_string(trace.termination) << "\n";
  os << "iter,cum_props,props,train_loss";
  if (has_test) os << ",test_error";
  os << ",rho_tilde,rho_hat,accepted,delta_or_sigma,step_norm,gamma,size_h,size_g,size_b,coupled,"
        "wall_ms\n";
  for (const IterationRecord& r : trace.records) {
    os << r.iter << ',' << r.cum_props << ',' << r.props << ',' << fmt(r.train_loss);
    if (has_test) os << ',' << (r.test_error ? fmt(*r.test_error) : std::string("nan"));
    os << ',' << fmt(r.rho_tilde) << ',' << fmt(r.rho_hat) << ',' << (r.accepted ? 1 : 0) << ','
       << fmt(r.delta_or_sigma) << ',' << fmt(r.step_norm) << ',' << r.gamma << ',' << r.sizes.h
       << ',' << r.sizes.g << ',' << r.sizes.b << ',' << (r.coupled ? 1 : 0) << ','
       << fmt(r.wall_ms) << '\n';
  }
}

namespace {

RunSummary run_point(const ExperimentSpec& spec, const LoadedData& data, const GridPoint& point) {
  RunSummary summary;
  summary.point = point;
  summary.file = trace_file_name(data.name, point);
  const NllsLogisticProblem problem(data.train_features, data.train_labels);
  const VariantConfig config = config_for(spec, point);
  RunHooks hooks;
  hooks.record_wall_time = spec.timing;
  if (data.test) {
    const Dataset& test = *data.test;
    hooks.test_error = [&test](const Vector& x) {
      return NllsLogisticProblem::classification_error(test.features, test.labels, x);
    };
  }
  const RunTrace trace = run(problem, initial_point(problem.dim(), point.seed), config, hooks);

  const std::filesystem::path path = std::filesystem::path(spec.out_dir) / summary.file;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_trace_csv(os, trace, {data.name, point}, data.test.has_value());
  os.flush();

  const IterationRecord& last = trace.records.back();
  summary.iterations = last.iter;
  summary.final_cum_props = last.cum_props;
  summary.final_train_loss = last.train_loss;
  summary.final_test_error = last.test_error;
  summary.termination = trace.termination;
  return summary;
}

}  // namespace

std::vector<RunSummary> run_experiment(const ExperimentSpec& spec) {
  const std::vector<GridPoint> points = expand_grid(spec);
  for (const GridPoint& p : points) config_for(spec, p).validate();
  const LoadedData data = load_experiment_data(spec);
  std::filesystem::create_directories(spec.out_dir);

  std::vector<RunSummary> summaries(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        summaries[i] = run_point(spec, data, points[i]);
      } catch (const std::exception& e) {
        summaries[i].point = points[i];
        summaries[i].file = trace_file_name(data.name, points[i]);
        summaries[i].error = e.what();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(spec.jobs, points.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::ofstream os(std::filesystem::path(spec.out_dir) / "summary.csv");
  if (!os) throw std::runtime_error("cannot write summary.csv in " + spec.out_dir);
  os << "dataset,algorithm,variant,fraction,param,seed,iterations,final_cum_props,final_train_loss,"
        "final_test_error,termination,file,error\n";
  for (const RunSummary& s : summaries) {
    os << data.name << ',' << to_string(s.point.algorithm) << ',' << to_string(s.point.variant)
       << ',' << short_num(s.point.fraction) << ',' << short_num(s.point.param) << ','
       << s.point.seed << ',' << s.iterations << ',' << s.final_cum_props << ','
       << fmt(s.final_train_loss) << ','
       << (s.final_test_error ? fmt(*s.final_test_error) : std::string()) << ','
       << (s.error.empty() ? to_string(s.termination) : "failed") << ',' << s.file << ','
       << s.error << '\n';
  }
  return summaries;
}

PlotMetric parse_plot_metric(const std::string& s) {
  if (s == "train_loss") return PlotMetric::train_loss;
  if (s == "test_error") return PlotMetric::test_error;
  throw ContractViolation("unknown metric '" + s + "'");
}

namespace {

struct ParsedTrace {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

ParsedTrace read_trace(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot read " + file);
  ParsedTrace t;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# sso-trace", 0) != 0)
    throw std::runtime_error(file + ": not an sso trace");
  for (const std::string& token : split(line.substr(11), ' ')) {
    const auto eq = token.find('=');
    if (eq != std::string::npos) t.meta[token.substr(0, eq)] = token.substr(eq + 1);
  }
  if (t.meta["schema_version"] != std::to_string(kTraceSchemaVersion))
    throw std::runtime_error(file + ": unsupported schema version");
  if (!std::getline(is, line)) throw std::runtime_error(file + ": missing header");
  t.header = split(line, ',');
  while (std::getline(is, line))
    if (!line.empty()) t.rows.push_back(split(line, ','));
  return t;
}

std::size_t column(const ParsedTrace& t, const std::string& name, const std::string& file) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw std::runtime_error(file + ": no " + name + " column");
}

}  // namespace

void emit_plot_data(const std::vector<std::string>& csv_files, PlotMetric metric,
                    std::size_t stride, std::ostream& os) {
  require(!csv_files.empty(), "no trace files given");
  require(stride >= 1, "downsampling stride must be >= 1");
  const std::string metric_name = metric == PlotMetric::train_loss ? "train_loss" : "test_error";
  std::vector<ParsedTrace> traces;
  for (const std::string& file : csv_files) {
    traces.push_back(read_trace(file));
    if (traces.back().meta["dataset"] != traces.front().meta["dataset"])
      throw std::runtime_error("refusing to mix datasets: " + traces.front().meta["dataset"] +
                               " and " + traces.back().meta["dataset"]);
    column(traces.back(), metric_name, file);
  }
  os << "variant,algorithm,seed,cum_props,value\n";
  for (std::size_t k = 0; k < traces.size(); ++k) {
    ParsedTrace& t = traces[k];
    const std::size_t props_col = column(t, "cum_props", csv_files[k]);
    const std::size_t value_col = column(t, metric_name, csv_files[k]);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (i % stride != 0 && i + 1 != t.rows.size()) continue;
      os << t.meta["variant"] << ',' << t.meta["algorithm"] << ',' << t.meta["seed"] << ','
         << t.rows[i].at(props_col) << ',' << t.rows[i].at(value_col) << '\n';
    }
  }
}

}  // namespace sso
