#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geograph/config.hpp"
#include "geograph/diagnostics.hpp"
#include "geograph/gcn.hpp"
#include "geograph/graphs.hpp"
#include "geograph/report.hpp"
#include "geograph/sparsify.hpp"

namespace geograph {

using Logger = std::function<void(std::string_view)>;

/// Runs fn(0) ... fn(count - 1) on up to `threads` workers (0 = hardware concurrency). Results must
/// be stored by index. The first exception, by index, is rethrown after all workers finish.
void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& fn);

struct RunOptions {
  TrainConfig train;  // seed is overwritten per run
  std::vector<std::uint64_t> seeds;
  bool compute_rcs = false;
  TsneConfig tsne;
  unsigned threads = 0;
  Logger log;
};

struct RunResult {
  bool ok = false;
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::optional<double> rcs;
  std::optional<Matrix> embedding;  // first seed only, when RCS is computed
  std::string error;
};

/// Trains one GCN per seed on the given operator. Runs that throw TrainingError are returned with
/// ok = false and logged.
std::vector<RunResult> train_seeds(const Dataset& dataset, const GcnInput& x, const NormalizedAdjacency& a,
                                   const RunOptions& opts);

/// Mean and sample standard deviation over the successful runs. Graph statistics come from `g`
/// when given. Throws TrainingError (with `context`) when every run failed.
SweepRecord summarize(std::string method, double param, const Graph* g, std::span<const RunResult> runs,
                      std::string_view context);

struct DensificationResult {
  MethodSweep sweep;
  std::vector<std::optional<Matrix>> embeddings;  // first-seed t-SNE per record, when computed
};

/// Densification sweep of one construction method. Alignment is computed on the `p_grid` ratios
/// (skipped when empty) and reported at the p* that best correlates with validation accuracy.
DensificationResult run_densification(const Dataset& dataset, GraphContext& ctx, Method method,
                                      std::span<const double> grid, std::span<const double> p_grid,
                                      const RunOptions& opts);

/// argmax of val_acc_mean, ties to the lowest edge density. Throws ParamError on an empty list.
const SweepRecord& select_optimum(std::span<const SweepRecord> records);
/// Indices of the `n` best records by val_acc_mean (ties to lower density), best first.
std::vector<Index> rank_records(std::span<const SweepRecord> records, Index n);

struct SparsificationResult {
  SparsificationStudy study;
  std::optional<Sparsifier> selected;  // empty when the base graph is kept
};

/// Sigma sweep on `base_graph`. The selected record is the sparsest one whose validation mean lies
/// within one standard error of the best sparsified mean, provided some sparsified graph beats the
/// base graph's validation mean; otherwise the base record is kept (sigma = 0).
SparsificationResult run_sparsification(const Dataset& dataset, const Graph& base_graph, const SweepRecord& base,
                                        std::span<const double> sigmas, double oversample_c,
                                        std::uint64_t sparsify_seed, const RunOptions& opts);

/// Selection rule of run_sparsification on finished records; nullopt means keep the base graph.
std::optional<Index> select_sparsified(const SweepRecord& base, std::span<const SweepRecord> records);

/// Candidate neighbor counts for the kNN classifier: {1, 2, 4, ..., 64} capped at |train|.
std::vector<Index> knnc_grid(Index n_train);

/// MLP (GCN without a graph) over the seeds and the kNN classifier with k tuned on validation.
std::vector<SweepRecord> run_baselines(const Dataset& dataset, const DistanceMatrix& d, bool mlp, bool knnc,
                                       const RunOptions& opts);

/// Full pipeline: baselines, densification sweeps, sparsification of the best graphs. Writes the
/// report files plus graphs/ (edge lists and sidecars) and embedding CSVs into `out_dir`.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                const Logger& log = {});

}  // namespace geograph
