// Command-line front end: dataset generation, graph construction, training, sparsification and
// the full experiment pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "geograph/config.hpp"
#include "geograph/error.hpp"
#include "geograph/harness.hpp"
#include "geograph/io.hpp"

namespace fs = std::filesystem;
using namespace geograph;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

Logger stderr_logger(bool quiet) {
  if (quiet) return {};
  return [](std::string_view line) { std::cerr << line << '\n'; };
}

struct CsvFlags {
  bool header = false;
  std::string delimiter = ",";

  void add(CLI::App* cmd) {
    cmd->add_flag("--header", header, "Feature CSV has a header row");
    cmd->add_option("--delimiter", delimiter, "Feature CSV delimiter")->check([](const std::string& s) {
      return s.size() == 1 ? std::string() : std::string("delimiter must be one character");
    });
  }
  CsvOptions options() const { return {header, delimiter.front()}; }
};

struct GcnFlags {
  TrainConfig cfg;

  void add(CLI::App* cmd) {
    cmd->add_option("--epochs", cfg.epochs, "Maximum training epochs")->capture_default_str();
    cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--dropout", cfg.dropout, "Dropout rate")->capture_default_str();
    cmd->add_option("--l2", cfg.l2, "L2 penalty on the first layer")->capture_default_str();
    cmd->add_option("--patience", cfg.early_stop_window, "Early stopping window in epochs")->capture_default_str();
    cmd->add_option("--hidden", cfg.hidden, "Hidden units")->capture_default_str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric graph construction, GCN training and spectral sparsification"};
  app.require_subcommand(1);

  // gen-constructive
  auto* gen = app.add_subcommand("gen-constructive", "Generate the stochastic-block Constructive dataset");
  ConstructiveParams cp;
  std::uint64_t gen_seed = 0;
  fs::path gen_out;
  gen->add_option("--clusters", cp.n_clusters)->capture_default_str();
  gen->add_option("--feat-per-cluster", cp.features_per_cluster)->capture_default_str();
  gen->add_option("--p-in", cp.p_in)->capture_default_str();
  gen->add_option("--p-out", cp.p_out)->capture_default_str();
  gen->add_option("--per-cluster", cp.samples_per_cluster)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out)->required();

  // build
  auto* build = app.add_subcommand("build", "Build a graph from a feature matrix");
  std::string build_method;
  double build_param = 0.0;
  fs::path build_features, build_out;
  std::optional<fs::path> save_distances_path;
  CsvFlags build_csv;
  build->add_option("--method", build_method)->required()->check(CLI::IsMember({"knn", "mknn", "cknn", "rmst", "mst"}));
  build->add_option("--param", build_param, "k for knn/mknn/cknn, gamma for rmst");
  build->add_option("--features", build_features)->required()->check(CLI::ExistingFile);
  build->add_option("--out", build_out)->required();
  build->add_option("--save-distances", save_distances_path, "Dump the distance matrix (uint64 N, then float64 row-major)");
  build_csv.add(build);

  // train
  auto* trn = app.add_subcommand("train", "Train one GCN (or MLP with --no-graph)");
  fs::path trn_features, trn_labels, trn_out;
  std::optional<fs::path> trn_split, trn_graph;
  bool trn_no_graph = false;
  std::uint64_t trn_seed = 0, trn_split_seed = 0;
  CsvFlags trn_csv;
  GcnFlags trn_gcn;
  trn->add_option("--features", trn_features)->required()->check(CLI::ExistingFile);
  trn->add_option("--labels", trn_labels)->required()->check(CLI::ExistingFile);
  trn->add_option("--split", trn_split, "Split JSON; generated from --split-seed when absent");
  trn->add_option("--split-seed", trn_split_seed)->capture_default_str();
  auto* graph_opt = trn->add_option("--graph", trn_graph, "Edge list TSV");
  auto* no_graph_opt = trn->add_flag("--no-graph", trn_no_graph, "Train without a graph (MLP)");
  graph_opt->excludes(no_graph_opt);
  trn->add_option("--seed", trn_seed)->capture_default_str();
  trn->add_option("--out", trn_out)->required();
  trn_csv.add(trn);
  trn_gcn.add(trn);

  // sparsify
  auto* spr = app.add_subcommand("sparsify", "Spectrally sparsify one graph");
  fs::path spr_graph, spr_out;
  Index spr_nodes = 0;
  SparsifyConfig spr_cfg;
  spr->add_option("--graph", spr_graph)->required()->check(CLI::ExistingFile);
  spr->add_option("--nodes", spr_nodes, "Node count (default: largest index + 1)");
  spr->add_option("--sigma", spr_cfg.sigma)->required();
  spr->add_option("--seed", spr_cfg.seed)->capture_default_str();
  spr->add_option("--oversample-c", spr_cfg.oversample_c)->capture_default_str();
  spr->add_option("--out", spr_out)->required();

  // experiment / sweep / sparsify-sweep share the config options
  fs::path cfg_path, run_out;
  std::optional<Index> grid_override;
  std::optional<unsigned> threads_override;
  bool quiet = false;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", cfg_path)->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", run_out)->required();
    cmd->add_option("--grid-size", grid_override, "Override the sweep grid size");
    cmd->add_option("--threads", threads_override, "Worker threads (0 = all cores)");
    cmd->add_flag("--quiet", quiet, "No progress output");
  };
  auto* exp = app.add_subcommand("experiment", "Run the full densification and sparsification pipeline");
  add_run_options(exp);
  auto* swp = app.add_subcommand("sweep", "Baselines and densification sweeps only");
  add_run_options(swp);
  auto* sps = app.add_subcommand("sparsify-sweep", "Sigma sweep on a given graph");
  add_run_options(sps);
  fs::path sps_graph;
  sps->add_option("--graph", sps_graph)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      make_dir(gen_out);
      save_dataset(generate_constructive(cp, gen_seed), gen_out);
    } else if (*build) {
      const auto features = l1_normalize(read_numeric_csv(build_features, build_csv.options()));
      GraphContext ctx(distance_matrix(features));
      make_dir(build_out);
      if (save_distances_path) {
        if (save_distances_path->has_parent_path()) make_dir(save_distances_path->parent_path());
        save_distances(ctx.distances, *save_distances_path);
      }
      const Graph g = build_method == "mst" ? ctx.mst : build_graph(ctx, parse_method(build_method), build_param);
      write_edge_list(g, build_out / "graph.tsv");
      write_graph_sidecar(g, build_out / "graph.json");
    } else if (*trn) {
      if (!trn_graph && !trn_no_graph) throw ConfigError("either --graph or --no-graph is required");
      LoadOptions lo;
      lo.csv = trn_csv.options();
      const Dataset ds = load_dataset(trn_features, trn_labels, trn_split, trn_split_seed, lo);
      const auto a = trn_graph ? normalize_adjacency(read_edge_list(*trn_graph, ds.size())) : no_graph(ds.size());
      TrainConfig cfg = trn_gcn.cfg;
      cfg.seed = trn_seed;
      const TrainResult r = train(ds, a, cfg);
      make_dir(trn_out);
      write_checkpoint(r.model, trn_out / "checkpoint.bin");
      write_history_csv(r.history, trn_out / "history.csv");
      nlohmann::json m;
      m["seed"] = trn_seed;
      m["best_epoch"] = r.best_epoch;
      m["epochs_run"] = r.history.size();
      m["val_acc"] = ds.split.validation.empty() ? nlohmann::json(nullptr)
                                                 : nlohmann::json(accuracy(r.output, ds.labels, ds.split.validation));
      m["test_acc"] = accuracy(r.output, ds.labels, ds.split.test);
      write_json(m, trn_out / "metrics.json");
      std::cout << m.dump() << '\n';
    } else if (*spr) {
      const Graph g = read_edge_list(spr_graph, spr_nodes);
      const Sparsifier s = sssa_sparsify(g, spr_cfg);
      make_dir(spr_out);
      write_edge_list(s.support, spr_out / "sparsified.tsv");
      write_sparsifier_sidecar(s, spr_cfg, spr_out / "sparsified.json");
    } else {
      ExperimentConfig cfg = load_config(cfg_path);
      if (grid_override) {
        cfg.sweep.grid_size = *grid_override;
        cfg.sparsify.grid_size = *grid_override;
      }
      if (threads_override) cfg.threads = *threads_override;
      const Logger log = stderr_logger(quiet);
      if (*exp || *swp) {
        if (*swp) cfg.sparsify.enabled = false;
        run_experiment(cfg, run_out, log);
      } else {
        validate(cfg);
        const Dataset ds = load_dataset(cfg.dataset);
        const Graph g = read_edge_list(sps_graph, ds.size());
        RunOptions opts;
        opts.train = cfg.gcn;
        opts.seeds = cfg.seeds;
        opts.threads = cfg.threads;
        opts.log = log;
        const auto base_runs = train_seeds(ds, GcnInput(ds.features), normalize_adjacency(g), opts);
        const SweepRecord base = summarize("input", 0.0, &g, base_runs, "input graph");
        const auto res = run_sparsification(ds, g, base, sigma_grid(ds.size(), cfg.sparsify.grid_size),
                                            cfg.sparsify.oversample_c, cfg.sparsify.seed, opts);
        make_dir(run_out);
        write_sweep_csv(res.study.records, run_out / "sparsify.csv");
        nlohmann::json j;
        j["base"] = to_json(res.study.base);
        j["selected"] = to_json(res.study.selected);
        j["oversample_c"] = cfg.sparsify.oversample_c;
        j["seeds"] = cfg.seeds;
        write_json(j, run_out / "sparsify.json");
        if (res.selected) {
          write_edge_list(res.selected->support, run_out / "sparsified.tsv");
          write_sparsifier_sidecar(*res.selected, {res.selected->sigma, cfg.sparsify.oversample_c, cfg.sparsify.seed},
                                   run_out / "sparsified.json");
        }
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParamError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitConfig;
  } catch (const TrainingError& e) {
    std::cerr << "training failed: " << e.what() << '\n';
    return kExitTraining;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
