#include "geograph/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "geograph/error.hpp"

namespace geograph {

namespace fs = std::filesystem;

namespace {

void emit(const Logger& log, const std::string& line) {
  if (log) log(line);
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

bool better(const SweepRecord& a, const SweepRecord& b) {
  if (a.val_acc_mean != b.val_acc_mean) return a.val_acc_mean > b.val_acc_mean;
  return a.edge_density < b.edge_density;
}

}  // namespace

void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(std::min<Index>(threads, count));
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (Index i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<RunResult> train_seeds(const Dataset& dataset, const GcnInput& x, const NormalizedAdjacency& a,
                                   const RunOptions& opts) {
  std::vector<RunResult> results(opts.seeds.size());
  parallel_for(opts.seeds.size(), opts.threads, [&](Index i) {
    TrainConfig cfg = opts.train;
    cfg.seed = opts.seeds[i];
    RunResult& r = results[i];
    try {
      const TrainResult t = train(x, dataset.labels, dataset.split, a, cfg);
      r.val_acc = dataset.split.validation.empty() ? 0.0 : accuracy(t.output, dataset.labels, dataset.split.validation);
      r.test_acc = accuracy(t.output, dataset.labels, dataset.split.test);
      if (opts.compute_rcs) {
        Embedding2D e = tsne_embed(t.output.z, opts.tsne, cfg.seed);
        r.rcs = rcs(e, dataset.labels);
        if (i == 0) r.embedding = std::move(e.coords);
      }
      r.ok = true;
    } catch (const TrainingError& e) {
      r.error = e.what();
    }
  });
  for (Index i = 0; i < results.size(); ++i)
    if (!results[i].ok) emit(opts.log, "run with seed " + std::to_string(opts.seeds[i]) + " failed: " + results[i].error);
  return results;
}

SweepRecord summarize(std::string method, double param, const Graph* g, std::span<const RunResult> runs,
                      std::string_view context) {
  std::vector<double> val, test, rc;
  int failed = 0;
  for (const auto& r : runs) {
    if (!r.ok) {
      ++failed;
      continue;
    }
    val.push_back(r.val_acc);
    test.push_back(r.test_acc);
    if (r.rcs) rc.push_back(*r.rcs);
  }
  if (val.empty()) throw TrainingError("every run failed at " + std::string(context), 0);
  SweepRecord rec;
  rec.method = std::move(method);
  rec.param = param;
  if (g) {
    rec.edge_density = edge_density(*g);
    rec.mean_degree = g->mean_degree();
    rec.edge_count = g->edge_count();
  }
  const auto v = moments(val);
  const auto t = moments(test);
  rec.val_acc_mean = v.mean;
  rec.val_acc_std = v.std;
  rec.test_acc_mean = t.mean;
  rec.test_acc_std = t.std;
  if (!rc.empty()) {
    const auto m = moments(rc);
    rec.rcs_mean = m.mean;
    rec.rcs_std = m.std;
  }
  rec.runs = static_cast<int>(val.size());
  rec.failed_runs = failed;
  return rec;
}

DensificationResult run_densification(const Dataset& dataset, GraphContext& ctx, Method method,
                                      std::span<const double> grid, std::span<const double> p_grid,
                                      const RunOptions& opts) {
  if (grid.empty()) throw ParamError("empty density grid");
  const std::string name = to_string(method);
  const GcnInput x(dataset.features);
  const Matrix yv = dataset.labels.values();

  DensificationResult out;
  out.sweep.method = name;
  Matrix table(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(p_grid.size()));
  for (Index gi = 0; gi < grid.size(); ++gi) {
    const double param = grid[gi];
    const Graph g = build_graph(ctx, method, param);
    const auto a = normalize_adjacency(g);
    if (!p_grid.empty()) {
      const auto curve = alignment_curve(a.apply(dataset.features.values()), yv, p_grid);
      for (Index pi = 0; pi < p_grid.size(); ++pi) table(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(pi)) = curve[pi];
    }
    auto runs = train_seeds(dataset, x, a, opts);
    auto rec = summarize(name, param, &g, runs, name + " param " + fmt(param));
    emit(opts.log, name + " param=" + fmt(param) + " density=" + fmt(rec.edge_density) + " val=" + fmt(rec.val_acc_mean) +
                       " test=" + fmt(rec.test_acc_mean));
    out.embeddings.push_back(runs.empty() ? std::nullopt : std::move(runs.front().embedding));
    out.sweep.records.push_back(std::move(rec));
  }

  if (!p_grid.empty()) {
    std::vector<double> acc;
    for (const auto& r : out.sweep.records) acc.push_back(r.val_acc_mean);
    try {
      const auto sel = select_p_star(table, acc, p_grid);
      out.sweep.p_star = sel.p_star;
      out.sweep.p_star_correlation = sel.correlation;
      for (double c : sel.correlations) out.sweep.p_correlations.push_back(std::isnan(c) ? std::nullopt : std::optional<double>(c));
      for (Index i = 0; i < acc.size(); ++i) out.sweep.records[i].alignment = sel.alignments[i];
    } catch (const CorrelationUndefined& e) {
      emit(opts.log, name + ": p* undefined (" + std::string(e.what()) + "), alignment not reported");
      out.sweep.p_correlations.assign(p_grid.size(), std::nullopt);
    }
  }
  out.sweep.optimum = select_optimum(out.sweep.records);
  return out;
}

const SweepRecord& select_optimum(std::span<const SweepRecord> records) {
  if (records.empty()) throw ParamError("no sweep records to select from");
  const SweepRecord* best = &records.front();
  for (const auto& r : records.subspan(1))
    if (better(r, *best)) best = &r;
  return *best;
}

std::vector<Index> rank_records(std::span<const SweepRecord> records, Index n) {
  std::vector<Index> idx(records.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return better(records[a], records[b]); });
  idx.resize(std::min(n, idx.size()));
  return idx;
}

std::optional<Index> select_sparsified(const SweepRecord& base, std::span<const SweepRecord> records) {
  if (records.empty()) return std::nullopt;
  Index best = 0;
  for (Index i = 1; i < records.size(); ++i)
    if (records[i].val_acc_mean > records[best].val_acc_mean) best = i;
  if (!(records[best].val_acc_mean > base.val_acc_mean)) return std::nullopt;
  const double se = records[best].val_acc_std / std::sqrt(static_cast<double>(std::max(records[best].runs, 1)));
  const double floor = records[best].val_acc_mean - se;
  Index pick = best;
  for (Index i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.val_acc_mean < floor) continue;
    if (r.edge_count < records[pick].edge_count ||
        (r.edge_count == records[pick].edge_count && r.val_acc_mean > records[pick].val_acc_mean))
      pick = i;
  }
  return pick;
}

SparsificationResult run_sparsification(const Dataset& dataset, const Graph& base_graph, const SweepRecord& base,
                                        std::span<const double> sigmas, double oversample_c,
                                        std::uint64_t sparsify_seed, const RunOptions& opts) {
  const auto resistances = effective_resistances(base_graph);
  const GcnInput x(dataset.features);
  SparsificationResult out;
  out.study.method = base.method;
  out.study.base = base;
  for (double sigma : sigmas) {
    const SparsifyConfig sc{sigma, oversample_c, sparsify_seed};
    const Sparsifier s = sssa_sparsify(base_graph, resistances, sc);
    const auto runs = train_seeds(dataset, x, normalize_adjacency(s.support), opts);
    auto rec = summarize("sparsified", sigma, &s.support, runs, base.method + " sigma " + fmt(sigma));
    rec.sigma = sigma;
    rec.q = s.q;
    rec.connected = s.connected;
    emit(opts.log, base.method + " sigma=" + fmt(sigma) + " degree=" + fmt(rec.mean_degree) + " val=" +
                       fmt(rec.val_acc_mean) + " test=" + fmt(rec.test_acc_mean));
    out.study.records.push_back(std::move(rec));
  }
  const auto pick = select_sparsified(base, out.study.records);
  if (pick) {
    out.study.selected = out.study.records[*pick];
    out.selected = sssa_sparsify(base_graph, resistances, {sigmas[*pick], oversample_c, sparsify_seed});
  } else {
    out.study.selected = base;
    out.study.selected.sigma = 0.0;
  }
  return out;
}

std::vector<Index> knnc_grid(Index n_train) {
  std::vector<Index> ks;
  for (Index k = 1; k <= 64 && k <= n_train; k *= 2) ks.push_back(k);
  return ks;
}

std::vector<SweepRecord> run_baselines(const Dataset& dataset, const DistanceMatrix& d, bool mlp, bool knnc,
                                       const RunOptions& opts) {
  std::vector<SweepRecord> out;
  if (mlp) {
    const auto runs = train_seeds(dataset, GcnInput(dataset.features), no_graph(dataset.size()), opts);
    out.push_back(summarize("mlp", 0.0, nullptr, runs, "mlp"));
    emit(opts.log, "mlp val=" + fmt(out.back().val_acc_mean) + " test=" + fmt(out.back().test_acc_mean));
  }
  if (knnc) {
    const auto& split = dataset.split;
    SweepRecord best;
    bool have = false;
    for (Index k : knnc_grid(split.train.size())) {
      const auto pred = knnc_classify(d, dataset.labels, split, k);
      SweepRecord r;
      r.method = "knnc";
      r.param = static_cast<double>(k);
      r.val_acc_mean = split.validation.empty() ? 0.0 : accuracy(pred, dataset.labels, split.validation);
      r.test_acc_mean = accuracy(pred, dataset.labels, split.test);
      r.runs = 1;
      if (!have || r.val_acc_mean > best.val_acc_mean) {
        best = r;
        have = true;
      }
    }
    if (!have) throw ParamError("kNN classifier needs a nonempty training set");
    emit(opts.log, "knnc k=" + fmt(best.param) + " val=" + fmt(best.val_acc_mean) + " test=" + fmt(best.test_acc_mean));
    out.push_back(best);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, const Logger& log) {
  validate(cfg);
  const Dataset ds = load_dataset(cfg.dataset);
  emit(log, "dataset " + ds.name + ": " + std::to_string(ds.size()) + " samples, " +
                std::to_string(ds.features.n_features()) + " features, " + std::to_string(ds.labels.n_classes()) +
                " classes");
  if (!ds.features.zero_rows().empty())
    emit(log, "warning: " + std::to_string(ds.features.zero_rows().size()) + " all-zero feature rows kept as zero");

  std::error_code ec;
  fs::create_directories(out_dir / "graphs", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "graphs").string() + ": " + ec.message());

  RunOptions opts;
  opts.train = cfg.gcn;
  opts.seeds = cfg.seeds;
  opts.compute_rcs = cfg.sweep.rcs;
  opts.tsne = cfg.sweep.tsne;
  opts.threads = cfg.threads;
  opts.log = log;
  if (opts.compute_rcs && !(opts.tsne.perplexity < static_cast<double>(ds.size()) / 3.0))
    throw ConfigError("sweep.tsne_perplexity must be below N/3");

  GraphContext ctx(distance_matrix(ds.features));

  ExperimentReport report;
  report.dataset = ds.name;
  report.n_samples = ds.size();
  report.n_features = ds.features.n_features();
  report.n_classes = ds.labels.n_classes();
  report.n_train = ds.split.train.size();
  report.n_validation = ds.split.validation.size();
  report.n_test = ds.split.test.size();
  report.seeds = cfg.seeds;
  report.config = to_json(cfg);

  report.baselines = run_baselines(ds, ctx.distances, cfg.mlp, cfg.knnc, opts);

  const std::vector<double> no_ratios;
  for (Method m : cfg.methods) {
    const auto grid = density_grid(m, ds.size(), cfg.sweep.grid_size);
    auto res = run_densification(ds, ctx, m, grid, cfg.sweep.alignment ? std::span<const double>(cfg.sweep.p_grid) : no_ratios,
                                 opts);
    const std::string name = to_string(m);
    const Graph best = build_graph(ctx, m, res.sweep.optimum.param);
    write_edge_list(best, out_dir / "graphs" / (name + "_optimum.tsv"));
    write_graph_sidecar(best, out_dir / "graphs" / (name + "_optimum.json"));
    for (Index i = 0; i < res.sweep.records.size(); ++i) {
      if (res.sweep.records[i] == res.sweep.optimum && res.embeddings[i]) {
        write_embedding_csv({*res.embeddings[i], cfg.seeds.front(), cfg.sweep.tsne.perplexity}, ds.labels,
                            out_dir / ("embedding_" + name + ".csv"));
        break;
      }
    }
    report.sweeps.push_back(std::move(res.sweep));
  }

  if (cfg.sparsify.enabled) {
    const Method m = parse_method(cfg.sparsify.method);
    const auto it = std::find_if(report.sweeps.begin(), report.sweeps.end(),
                                 [&](const MethodSweep& s) { return s.method == to_string(m); });
    const auto sigmas = sigma_grid(ds.size(), cfg.sparsify.grid_size);
    const auto ranks = rank_records(it->records, static_cast<Index>(cfg.sparsify.top_n));
    for (Index r = 0; r < ranks.size(); ++r) {
      const SweepRecord& base = it->records[ranks[r]];
      const Graph g = build_graph(ctx, m, base.param);
      auto res = run_sparsification(ds, g, base, sigmas, cfg.sparsify.oversample_c, cfg.sparsify.seed, opts);
      res.study.rank = static_cast<int>(r + 1);
      if (res.selected) {
        const std::string stem = it->method + "_sparsified_" + std::to_string(r + 1);
        write_edge_list(res.selected->support, out_dir / "graphs" / (stem + ".tsv"));
        write_sparsifier_sidecar(*res.selected, {res.selected->sigma, cfg.sparsify.oversample_c, cfg.sparsify.seed},
                                 out_dir / "graphs" / (stem + ".json"));
      }
      report.sparsification.push_back(std::move(res.study));
    }
  }

  report.generated_at = utc_timestamp();
  emit_report(report, out_dir);
  return report;
}

}  // namespace geograph
