#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "sso/problems.hpp"

namespace sso {

enum class Split { train, test };

/// How raw LIBSVM labels become {0, 1} targets.
///   signed:    -1 -> 0, 0 -> 0, +1 -> 1 (anything else is a parse error)
///   one_two:   1 -> 0, 2 -> 1 (covtype.binary)
///   automatic: signed if every label is in {-1, 0, 1}, else one_two if every
///              label is in {1, 2}, else parse error
enum class LabelScheme { signed_labels, one_two, automatic };

struct Dataset {
  SparseRowMatrix features;  // n x d, zero-based columns
  Vector labels;             // entries in {0, 1}
  std::string name;
  Split split = Split::train;

  std::size_t num_rows() const { return static_cast<std::size_t>(features.rows()); }
  Eigen::Index dim() const { return features.cols(); }
};

struct ParseOptions {
  std::optional<Eigen::Index> expected_dim;
  LabelScheme labels = LabelScheme::signed_labels;
  std::string name;
  Split split = Split::train;
};

Dataset parse_libsvm(std::istream& in, const ParseOptions& options = {});
Dataset parse_libsvm_string(const std::string& text, const ParseOptions& options = {});

/// Reads a file, decompressing transparently when the name ends in ".gz".
Dataset load_libsvm_file(const std::string& path, ParseOptions options = {});

/// Writes labels as -1/+1 and values with round-trip precision.
void write_libsvm(const Dataset& data, std::ostream& out);

/// Widens both matrices to the larger column count so a train/test pair shares d.
void align_dimensions(Dataset& train, Dataset& test);

struct DatasetStats {
  std::size_t n = 0;
  Eigen::Index d = 0;
  std::size_t nnz = 0;
  double label_balance = 0.0;  // fraction of rows with label 1
};

DatasetStats dataset_stats(const Dataset& data);

/// Seeded synthetic binary-classification data shaped like the sparse
/// one-hot LIBSVM sets: each feature is 1 with probability `density`, labels
/// come from a planted linear rule with label noise.
Dataset make_synthetic_binary(std::size_t n, Eigen::Index d, double density, double label_noise,
                              std::uint64_t seed, const std::string& name = "synthetic");

/// Splits off the last `test_rows` rows as a test set.
std::pair<Dataset, Dataset> split_tail(const Dataset& data, std::size_t test_rows);

}  // namespace sso
