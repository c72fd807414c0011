#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geograph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::size_t;

/// L1 row-normalized N x F feature matrix. All-zero rows stay zero and are listed in zero_rows().
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  const Matrix& values() const { return values_; }
  Index n_samples() const { return static_cast<Index>(values_.rows()); }
  Index n_features() const { return static_cast<Index>(values_.cols()); }
  const std::vector<Index>& zero_rows() const { return zero_rows_; }

 private:
  friend FeatureMatrix l1_normalize(const Matrix& raw);
  Matrix values_;
  std::vector<Index> zero_rows_;
};

/// Divides every nonzero row by its L1 norm (sum of absolute values). Rows that are already
/// normalized to within summation roundoff are left untouched, which makes the operation idempotent
/// bit-for-bit. Throws FormatError on NaN/Inf.
FeatureMatrix l1_normalize(const Matrix& raw);

/// One-hot class membership, stored as a label per sample.
class MembershipMatrix {
 public:
  MembershipMatrix() = default;
  /// Throws FormatError if a label is negative or >= n_classes.
  MembershipMatrix(std::vector<int> labels, int n_classes);

  Index n_samples() const { return labels_.size(); }
  int n_classes() const { return n_classes_; }
  int label(Index i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  /// Dense N x C 0-1 matrix.
  Matrix values() const;
  std::vector<Index> class_counts() const;

 private:
  std::vector<int> labels_;
  int n_classes_ = 0;
};

struct Split {
  std::vector<Index> train;
  std::vector<Index> validation;
  std::vector<Index> test;

  bool operator==(const Split&) const = default;
};

/// Throws FormatError unless the three sets are disjoint and cover 0..n-1.
void validate_split(const Split& split, Index n);

struct Dataset {
  std::string name;
  FeatureMatrix features;
  MembershipMatrix labels;
  Split split;

  Index size() const { return features.n_samples(); }
};

/// Stratified split. |train| = round(train_frac N), |validation| = round(val_frac N), the rest is
/// test. Each subset is spread evenly over classes; quotas that do not divide evenly hand their
/// remainder to classes in ascending class-id order. Deterministic for a fixed seed.
Split stratified_split(const MembershipMatrix& labels, double train_frac, double val_frac,
                       std::uint64_t seed);
/// Same, with absolute subset sizes.
Split stratified_split_sized(const MembershipMatrix& labels, Index n_train, Index n_val, std::uint64_t seed);

struct CsvOptions {
  bool header = false;
  char delimiter = ',';
};

struct LoadOptions {
  CsvOptions csv;
  /// When unset the class count is max(label) + 1.
  std::optional<int> n_classes;
  double train_frac = 0.05;
  double val_frac = 0.10;
  /// Absolute sizes; each overrides its fraction when set.
  std::optional<Index> train_count;
  std::optional<Index> val_count;
  std::string name;
};

Matrix read_numeric_csv(const std::filesystem::path& path, const CsvOptions& opts = {});
std::vector<int> read_labels_csv(const std::filesystem::path& path, const CsvOptions& opts = {});
Split read_split_json(const std::filesystem::path& path);

void write_features_csv(const FeatureMatrix& features, const std::filesystem::path& path);
void write_labels_csv(const MembershipMatrix& labels, const std::filesystem::path& path);
void write_split_json(const Split& split, const std::filesystem::path& path);

/// Loads features and labels (and a split file when given; otherwise generates a stratified split
/// from `seed`). Features are L1-normalized on load.
Dataset load_dataset(const std::filesystem::path& features_path,
                     const std::filesystem::path& labels_path,
                     const std::optional<std::filesystem::path>& split_path, std::uint64_t seed,
                     const LoadOptions& opts = {});

/// Writes features.csv, labels.csv and split.json into `dir`.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

struct ConstructiveParams {
  int n_clusters = 10;
  int features_per_cluster = 50;
  double p_in = 0.07;
  double p_out = 0.007;
  int samples_per_cluster = 100;
};

/// Raw binary features of the stochastic-block generator (before normalization) plus labels.
/// Samples are ordered cluster by cluster.
std::pair<Matrix, std::vector<int>> constructive_raw(const ConstructiveParams& params,
                                                     std::uint64_t seed);

Dataset generate_constructive(const ConstructiveParams& params, std::uint64_t seed);

}  // namespace geograph
