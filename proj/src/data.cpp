#include "geograph/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "geograph/error.hpp"
#include "geograph/io.hpp"
#include "geograph/rng.hpp"

namespace geograph {

namespace fs = std::filesystem;

FeatureMatrix l1_normalize(const Matrix& raw) {
  if (!raw.allFinite()) throw FormatError("feature matrix contains NaN or Inf");
  FeatureMatrix out;
  out.values_ = raw;
  const double tolerance =
      2.0 * static_cast<double>(raw.cols() + 1) * std::numeric_limits<double>::epsilon();
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double norm = raw.row(i).cwiseAbs().sum();
    if (norm == 0.0) {
      out.zero_rows_.push_back(static_cast<Index>(i));
      continue;
    }
    if (std::abs(norm - 1.0) <= tolerance) continue;
    out.values_.row(i) /= norm;
  }
  return out;
}

MembershipMatrix::MembershipMatrix(std::vector<int> labels, int n_classes)
    : labels_(std::move(labels)), n_classes_(n_classes) {
  if (n_classes_ <= 0) throw FormatError("number of classes must be positive");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= n_classes_) {
      throw FormatError("label " + std::to_string(labels_[i]) + " at row " + std::to_string(i) +
                        " outside [0, " + std::to_string(n_classes_) + ")");
    }
  }
}

Matrix MembershipMatrix::values() const {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels_.size()), n_classes_);
  for (std::size_t i = 0; i < labels_.size(); ++i) y(static_cast<Eigen::Index>(i), labels_[i]) = 1.0;
  return y;
}

std::vector<Index> MembershipMatrix::class_counts() const {
  std::vector<Index> counts(static_cast<std::size_t>(n_classes_), 0);
  for (int c : labels_) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

void validate_split(const Split& split, Index n) {
  std::vector<char> seen(n, 0);
  auto mark = [&](const std::vector<Index>& part, const char* name) {
    for (Index i : part) {
      if (i >= n) throw FormatError(std::string("split ") + name + " index out of range");
      if (seen[i]) throw FormatError("split sets overlap at index " + std::to_string(i));
      seen[i] = 1;
    }
  };
  mark(split.train, "train");
  mark(split.validation, "validation");
  mark(split.test, "test");
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw FormatError("split does not cover every sample");
  }
}

namespace {

// Spreads `total` over classes as evenly as the capacities allow; leftovers go to classes in
// ascending id order.
std::vector<Index> allocate_evenly(Index total, const std::vector<Index>& capacity) {
  const std::size_t n_classes = capacity.size();
  std::vector<Index> quota(n_classes, 0);
  const Index base = total / n_classes;
  Index assigned = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    quota[c] = std::min(base, capacity[c]);
    assigned += quota[c];
  }
  while (assigned < total) {
    bool progressed = false;
    for (std::size_t c = 0; c < n_classes && assigned < total; ++c) {
      if (quota[c] < capacity[c]) {
        ++quota[c];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return quota;
}

}  // namespace

Split stratified_split(const MembershipMatrix& labels, double train_frac, double val_frac,
                       std::uint64_t seed) {
  if (!(train_frac >= 0.0 && val_frac >= 0.0 && train_frac + val_frac < 1.0)) {
    throw ParamError("split fractions must be nonnegative with train + validation < 1");
  }
  const auto n = static_cast<double>(labels.n_samples());
  return stratified_split_sized(labels, static_cast<Index>(std::llround(train_frac * n)),
                                static_cast<Index>(std::llround(val_frac * n)), seed);
}

Split stratified_split_sized(const MembershipMatrix& labels, Index n_train, Index n_val, std::uint64_t seed) {
  const Index n = labels.n_samples();
  if (n_train >= n || n_val >= n - n_train) {
    throw ParamError("split sizes must leave at least one test sample");
  }
  const auto n_classes = static_cast<std::size_t>(labels.n_classes());
  std::vector<std::vector<Index>> members(n_classes);
  for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(labels.label(i))].push_back(i);
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (members[c].empty()) throw ParamError("class " + std::to_string(c) + " has no samples");
  }

  std::vector<Index> capacity(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) capacity[c] = members[c].size();
  const auto train_quota = allocate_evenly(n_train, capacity);
  for (std::size_t c = 0; c < n_classes; ++c) capacity[c] -= train_quota[c];
  const auto val_quota = allocate_evenly(n_val, capacity);

  CounterRng rng(seed, streams::kSplit);
  Split split;
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& m = members[c];
    shuffle(std::span<Index>(m), rng);
    const auto t = static_cast<std::ptrdiff_t>(train_quota[c]);
    const auto v = static_cast<std::ptrdiff_t>(val_quota[c]);
    split.train.insert(split.train.end(), m.begin(), m.begin() + t);
    split.validation.insert(split.validation.end(), m.begin() + t, m.begin() + t + v);
    split.test.insert(split.test.end(), m.begin() + t + v, m.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, const fs::path& path, std::size_t line_no) {
  T value{};
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                      std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::ifstream open_input(const fs::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

Matrix read_numeric_csv(const fs::path& path, const CsvOptions& opts) {
  auto in = open_input(path);
  std::vector<double> cells;
  std::size_t n_cols = 0;
  std::size_t n_rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (opts.header && line_no == 1) continue;
    const auto fields = split_fields(line, opts.delimiter);
    if (n_rows == 0) {
      n_cols = fields.size();
    } else if (fields.size() != n_cols) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(n_cols) + " columns, found " + std::to_string(fields.size()));
    }
    for (auto f : fields) cells.push_back(parse_number<double>(f, path, line_no));
    ++n_rows;
  }
  if (n_rows == 0) throw FormatError(path.string() + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c = 0; c < n_cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r * n_cols + c];
  return m;
}

std::vector<int> read_labels_csv(const fs::path& path, const CsvOptions& opts) {
  auto in = open_input(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (opts.header && line_no == 1) continue;
    const auto fields = split_fields(line, opts.delimiter);
    if (fields.size() != 1) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected one label");
    }
    labels.push_back(parse_number<int>(fields[0], path, line_no));
  }
  if (labels.empty()) throw FormatError(path.string() + ": no labels");
  return labels;
}

Split read_split_json(const fs::path& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
    Split s;
    s.train = j.at("train").get<std::vector<Index>>();
    s.validation = j.at("validation").get<std::vector<Index>>();
    s.test = j.at("test").get<std::vector<Index>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid split file: " + e.what());
  }
}

void write_features_csv(const FeatureMatrix& features, const fs::path& path) {
  auto out = open_output(path);
  const auto& v = features.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j) out << ',';
      out << format_double(v(i, j));
    }
    out << '\n';
  }
}

void write_labels_csv(const MembershipMatrix& labels, const fs::path& path) {
  auto out = open_output(path);
  for (int l : labels.labels()) out << l << '\n';
}

void write_split_json(const Split& split, const fs::path& path) {
  auto out = open_output(path);
  nlohmann::json j;
  j["train"] = split.train;
  j["validation"] = split.validation;
  j["test"] = split.test;
  out << j.dump() << '\n';
}

Dataset load_dataset(const fs::path& features_path, const fs::path& labels_path,
                     const std::optional<fs::path>& split_path, std::uint64_t seed,
                     const LoadOptions& opts) {
  Dataset ds;
  ds.name = opts.name.empty() ? features_path.stem().string() : opts.name;
  ds.features = l1_normalize(read_numeric_csv(features_path, opts.csv));
  CsvOptions label_csv = opts.csv;
  label_csv.delimiter = ',';
  auto labels = read_labels_csv(labels_path, label_csv);
  if (labels.size() != ds.features.n_samples()) {
    throw FormatError("features have " + std::to_string(ds.features.n_samples()) + " rows but labels have " +
                      std::to_string(labels.size()));
  }
  int n_classes = 0;
  if (opts.n_classes) {
    n_classes = *opts.n_classes;
  } else {
    for (int l : labels) n_classes = std::max(n_classes, l + 1);
  }
  ds.labels = MembershipMatrix(std::move(labels), n_classes);
  if (split_path) {
    ds.split = read_split_json(*split_path);
    validate_split(ds.split, ds.size());
  } else {
    const auto n = static_cast<double>(ds.size());
    ds.split = stratified_split_sized(ds.labels, opts.train_count.value_or(std::llround(opts.train_frac * n)),
                                      opts.val_count.value_or(std::llround(opts.val_frac * n)), seed);
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  write_features_csv(dataset.features, dir / "features.csv");
  write_labels_csv(dataset.labels, dir / "labels.csv");
  write_split_json(dataset.split, dir / "split.json");
}

std::pair<Matrix, std::vector<int>> constructive_raw(const ConstructiveParams& p, std::uint64_t seed) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(p.p_in) || !in_unit(p.p_out)) throw ParamError("probabilities must lie in [0, 1]");
  if (p.p_out > p.p_in) throw ParamError("p_out must not exceed p_in");
  if (p.n_clusters <= 0 || p.features_per_cluster <= 0 || p.samples_per_cluster <= 0) {
    throw ParamError("cluster, feature and sample counts must be positive");
  }
  const int n = p.n_clusters * p.samples_per_cluster;
  const int f = p.n_clusters * p.features_per_cluster;
  Matrix raw = Matrix::Zero(n, f);
  std::vector<int> labels(static_cast<std::size_t>(n));
  CounterRng rng(seed, streams::kGenerator);
  for (int i = 0; i < n; ++i) {
    const int cluster = i / p.samples_per_cluster;
    labels[static_cast<std::size_t>(i)] = cluster;
    for (int j = 0; j < f; ++j) {
      const double prob = (j / p.features_per_cluster == cluster) ? p.p_in : p.p_out;
      if (rng.bernoulli(prob)) raw(i, j) = 1.0;
    }
  }
  return {std::move(raw), std::move(labels)};
}

Dataset generate_constructive(const ConstructiveParams& params, std::uint64_t seed) {
  auto [raw, labels] = constructive_raw(params, seed);
  Dataset ds;
  ds.name = "constructive";
  ds.features = l1_normalize(raw);
  ds.labels = MembershipMatrix(std::move(labels), params.n_clusters);
  ds.split = stratified_split(ds.labels, 0.05, 0.10, seed);
  return ds;
}

}  // namespace geograph
