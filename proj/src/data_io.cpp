#include "sso/data_io.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "sso/error.hpp"
#include "sso/rng.hpp"

namespace sso {

namespace {

using Triplet = Eigen::Triplet<double, std::int64_t>;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(out);
}

bool parse_index(std::string_view token, std::int64_t& out) {
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

double map_label(double raw, LabelScheme scheme, std::size_t line) {
  if (scheme == LabelScheme::one_two) {
    if (raw == 1.0) return 0.0;
    if (raw == 2.0) return 1.0;
    throw ParseError("label must be 1 or 2 under the one_two scheme", line);
  }
  if (raw == -1.0 || raw == 0.0) return 0.0;
  if (raw == 1.0) return 1.0;
  throw ParseError("label must be -1, 0 or +1", line);
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const ParseOptions& options) {
  if (options.expected_dim) require(*options.expected_dim > 0, "expected_dim must be positive");

  std::vector<Triplet> entries;
  std::vector<double> raw_labels;
  std::vector<std::size_t> label_lines;
  std::int64_t max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
      rest = trim(rest.substr(0, hash));
    }
    if (rest.empty()) continue;

    const auto row = static_cast<std::int64_t>(raw_labels.size());
    std::size_t pos = rest.find_first_of(" \t");
    double label = 0.0;
    if (!parse_double(rest.substr(0, pos), label)) {
      throw ParseError("malformed label '" + std::string(rest.substr(0, pos)) + "'", line_no);
    }
    raw_labels.push_back(label);
    label_lines.push_back(line_no);

    std::int64_t previous = 0;
    while (pos != std::string_view::npos) {
      const auto start = rest.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      pos = rest.find_first_of(" \t", start);
      const std::string_view token = rest.substr(start, pos == std::string_view::npos ? pos : pos - start);
      const auto colon = token.find(':');
      std::int64_t index = 0;
      double value = 0.0;
      if (colon == std::string_view::npos || !parse_index(token.substr(0, colon), index) ||
          !parse_double(token.substr(colon + 1), value)) {
        throw ParseError("malformed feature token '" + std::string(token) + "'", line_no);
      }
      if (index < 1) throw ParseError("feature index must be >= 1", line_no);
      if (index <= previous) throw ParseError("feature indices must be strictly increasing", line_no);
      if (options.expected_dim && index > *options.expected_dim) {
        throw ParseError("feature index " + std::to_string(index) + " exceeds dimension " +
                             std::to_string(*options.expected_dim),
                         line_no);
      }
      previous = index;
      max_index = std::max(max_index, index);
      if (value != 0.0) entries.emplace_back(row, index - 1, value);
    }
  }

  if (raw_labels.empty()) throw ParseError("dataset contains no rows", 0);

  LabelScheme scheme = options.labels;
  if (scheme == LabelScheme::automatic) {
    bool all_signed = true;
    bool all_one_two = true;
    for (double y : raw_labels) {
      all_signed = all_signed && (y == -1.0 || y == 0.0 || y == 1.0);
      all_one_two = all_one_two && (y == 1.0 || y == 2.0);
    }
    if (all_signed) {
      scheme = LabelScheme::signed_labels;
    } else if (all_one_two) {
      scheme = LabelScheme::one_two;
    } else {
      scheme = LabelScheme::signed_labels;  // reports the first offending line below
    }
  }

  Dataset data;
  data.name = options.name;
  data.split = options.split;
  data.labels.resize(static_cast<Eigen::Index>(raw_labels.size()));
  for (std::size_t k = 0; k < raw_labels.size(); ++k) {
    data.labels[static_cast<Eigen::Index>(k)] = map_label(raw_labels[k], scheme, label_lines[k]);
  }

  const std::int64_t d = options.expected_dim ? *options.expected_dim : max_index;
  if (d <= 0) throw ParseError("dataset has no features", 0);
  data.features.resize(static_cast<Eigen::Index>(raw_labels.size()), d);
  data.features.setFromTriplets(entries.begin(), entries.end());
  data.features.makeCompressed();
  return data;
}

Dataset parse_libsvm_string(const std::string& text, const ParseOptions& options) {
  std::istringstream in(text);
  return parse_libsvm(in, options);
}

Dataset load_libsvm_file(const std::string& path, ParseOptions options) {
  if (options.name.empty()) {
    std::string base = path.substr(path.find_last_of('/') + 1);
    if (base.size() > 3 && base.ends_with(".gz")) base.resize(base.size() - 3);
    options.name = base;
  }
  if (path.size() > 3 && path.ends_with(".gz")) {
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw std::runtime_error("cannot open " + path);
    std::string text;
    char buffer[1 << 16];
    int got = 0;
    while ((got = gzread(file, buffer, sizeof(buffer))) > 0) text.append(buffer, static_cast<std::size_t>(got));
    const bool failed = got < 0;
    gzclose(file);
    if (failed) throw std::runtime_error("corrupt gzip stream in " + path);
    return parse_libsvm_string(text, options);
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_libsvm(in, options);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  char buffer[64];
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    out << (data.labels[i] == 1.0 ? "+1" : "-1");
    for (SparseRowMatrix::InnerIterator it(data.features, i); it; ++it) {
      std::snprintf(buffer, sizeof(buffer), " %lld:%.17g", static_cast<long long>(it.col() + 1),
                    it.value());
      out << buffer;
    }
    out << '\n';
  }
}

void align_dimensions(Dataset& train, Dataset& test) {
  const Eigen::Index d = std::max(train.dim(), test.dim());
  if (train.dim() < d) train.features.conservativeResize(train.features.rows(), d);
  if (test.dim() < d) test.features.conservativeResize(test.features.rows(), d);
  train.features.makeCompressed();
  test.features.makeCompressed();
}

DatasetStats dataset_stats(const Dataset& data) {
  DatasetStats s;
  s.n = data.num_rows();
  s.d = data.dim();
  s.nnz = static_cast<std::size_t>(data.features.nonZeros());
  s.label_balance = s.n == 0 ? 0.0 : data.labels.sum() / static_cast<double>(s.n);
  return s;
}

Dataset make_synthetic_binary(std::size_t n, Eigen::Index d, double density, double label_noise,
                              std::uint64_t seed, const std::string& name) {
  require(n > 0 && d > 0, "synthetic data needs n > 0 and d > 0");
  require(density > 0.0 && density <= 1.0, "density must be in (0, 1]");
  require(label_noise >= 0.0 && label_noise < 0.5, "label noise must be in [0, 0.5)");
  Rng rng(seed);
  Vector planted(d);
  for (Eigen::Index j = 0; j < d; ++j) planted[j] = rng.normal();

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(static_cast<double>(n) * static_cast<double>(d) * density * 1.1));
  Dataset data;
  data.name = name;
  data.labels.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double score = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (rng.uniform01() < density) {
        entries.emplace_back(static_cast<std::int64_t>(i), j, 1.0);
        score += planted[j];
      }
    }
    double y = score > 0.0 ? 1.0 : 0.0;
    if (rng.uniform01() < label_noise) y = 1.0 - y;
    data.labels[static_cast<Eigen::Index>(i)] = y;
  }
  data.features.resize(static_cast<Eigen::Index>(n), d);
  data.features.setFromTriplets(entries.begin(), entries.end());
  data.features.makeCompressed();
  return data;
}

std::pair<Dataset, Dataset> split_tail(const Dataset& data, std::size_t test_rows) {
  const std::size_t n = data.num_rows();
  require(test_rows > 0 && test_rows < n, "test split must leave both parts non-empty");
  const auto n_train = static_cast<Eigen::Index>(n - test_rows);
  const auto n_test = static_cast<Eigen::Index>(test_rows);
  Dataset train;
  Dataset test;
  train.name = test.name = data.name;
  train.split = Split::train;
  test.split = Split::test;
  train.features = data.features.topRows(n_train);
  test.features = data.features.bottomRows(n_test);
  train.features.makeCompressed();
  test.features.makeCompressed();
  train.labels = data.labels.head(n_train);
  test.labels = data.labels.tail(n_test);
  return {std::move(train), std::move(test)};
}

}  // namespace sso
