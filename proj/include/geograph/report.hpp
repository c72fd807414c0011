#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geograph/data.hpp"

namespace geograph {

/// Aggregate of the seeded runs at one sweep point (or one baseline).
struct SweepRecord {
  std::string method;
  double param = 0.0;
  double edge_density = 0.0;
  double mean_degree = 0.0;
  Index edge_count = 0;
  double val_acc_mean = 0.0;
  double val_acc_std = 0.0;
  double test_acc_mean = 0.0;
  double test_acc_std = 0.0;
  std::optional<double> alignment;
  std::optional<double> rcs_mean;
  std::optional<double> rcs_std;
  int runs = 0;
  int failed_runs = 0;
  // Sparsification points only.
  std::optional<double> sigma;
  std::optional<std::uint64_t> q;
  std::optional<bool> connected;

  bool operator==(const SweepRecord&) const = default;
};

struct MethodSweep {
  std::string method;
  std::vector<SweepRecord> records;
  SweepRecord optimum;
  std::optional<double> p_star;
  std::optional<double> p_star_correlation;
  std::vector<std::optional<double>> p_correlations;  // per p grid ratio

  bool operator==(const MethodSweep&) const = default;
};

struct SparsificationStudy {
  std::string method;
  int rank = 1;  // 1 = best densification point
  SweepRecord base;
  std::vector<SweepRecord> records;
  SweepRecord selected;  // equals `base` when no sparsified graph wins

  bool operator==(const SparsificationStudy&) const = default;
};

struct ExperimentReport {
  std::string dataset;
  Index n_samples = 0;
  Index n_features = 0;
  int n_classes = 0;
  Index n_train = 0;
  Index n_validation = 0;
  Index n_test = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepRecord> baselines;
  std::vector<MethodSweep> sweeps;
  std::vector<SparsificationStudy> sparsification;
  nlohmann::json config;
  std::string generated_at;

  bool operator==(const ExperimentReport&) const = default;
};

nlohmann::json to_json(const SweepRecord& r);
SweepRecord sweep_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentReport& r);
/// Throws FormatError on missing or mistyped fields.
ExperimentReport report_from_json(const nlohmann::json& j);

/// Writes report.json, summary.csv (one row per method optimum, then one per baseline),
/// sweep_<method>.csv, sparsify_<method>_<rank>.csv and diagnostics.json into `dir`.
void emit_report(const ExperimentReport& r, const std::filesystem::path& dir);
ExperimentReport parse_report(const std::filesystem::path& report_json);

/// Columns: param,density,mean_degree,edge_count,val_acc_mean,val_acc_std,test_acc_mean,test_acc_std,
/// alignment,rcs_mean,rcs_std,runs,failed_runs,sigma,q,connected (empty cells for absent values).
void write_sweep_csv(std::span<const SweepRecord> records, const std::filesystem::path& path);

/// UTC time in ISO 8601.
std::string utc_timestamp();

}  // namespace geograph
