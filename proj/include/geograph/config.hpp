#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geograph/data.hpp"
#include "geograph/diagnostics.hpp"
#include "geograph/gcn.hpp"
#include "geograph/graphs.hpp"

namespace geograph {

struct DatasetConfig {
  std::string name;
  /// "files" reads features/labels (and an optional split); "constructive" generates the SBM data.
  std::string source = "files";
  std::filesystem::path features;
  std::filesystem::path labels;
  std::optional<std::filesystem::path> split;
  bool header = false;
  char delimiter = ',';
  std::optional<int> n_classes;
  double train_frac = 0.05;
  double val_frac = 0.10;
  std::optional<Index> train_count;
  std::optional<Index> val_count;
  std::uint64_t split_seed = 0;
  ConstructiveParams constructive;
  std::uint64_t generator_seed = 0;
};

struct SweepConfig {
  Index grid_size = 50;
  bool alignment = true;
  bool rcs = true;
  std::vector<double> p_grid = default_p_grid();
  TsneConfig tsne;
};

struct SparsifyStageConfig {
  bool enabled = true;
  std::string method = "cknn";
  Index grid_size = 50;
  double oversample_c = 0.25;
  std::uint64_t seed = 0;
  int top_n = 1;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  std::vector<Method> methods = {Method::Knn, Method::Mknn, Method::Cknn, Method::Rmst};
  bool mlp = true;
  bool knnc = true;
  TrainConfig gcn;
  SweepConfig sweep;
  SparsifyStageConfig sparsify;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Parses TOML. Relative dataset paths are resolved against `base_dir`. Throws ConfigError with the
/// offending key on unknown keys, wrong types or out-of-range values.
ExperimentConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError when a field is out of range.
void validate(const ExperimentConfig& cfg);

/// Echo of every effective setting, for the report.
nlohmann::json to_json(const ExperimentConfig& cfg);

Dataset load_dataset(const DatasetConfig& cfg);

}  // namespace geograph
