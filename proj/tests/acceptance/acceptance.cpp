// Acceptance checks. Prints one status line per criterion on stdout, progress on stderr.
//
// Status words: PASS, FAIL, SKIP (inputs unavailable) and DEVIATION (the criterion as written
// cannot hold for the implemented definitions; the line states what was measured instead).
// Exit code 1 if any line is FAIL, 77 if every line is SKIP, 0 otherwise. Criteria named with
// --known-failure still print FAIL but do not set the exit code.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "common/oracles.hpp"
#include "geograph/config.hpp"
#include "geograph/error.hpp"
#include "geograph/harness.hpp"
#include "geograph/io.hpp"

namespace fs = std::filesystem;
using namespace geograph;

namespace {

enum class Status { Pass, Fail, Skip, Deviation };

const char* word(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Skip: return "SKIP";
    case Status::Deviation: return "DEVIATION";
  }
  return "?";
}

struct Line {
  std::string id;
  Status status;
  std::string detail;
};

std::vector<Line> lines;

void report(std::string id, Status s, std::string detail) {
  std::cout << std::left << std::setw(5) << id << ' ' << std::setw(9) << word(s) << ' ' << detail << std::endl;
  lines.push_back({std::move(id), s, std::move(detail)});
}

void report(std::string id, bool ok, std::string detail) {
  report(std::move(id), ok ? Status::Pass : Status::Fail, std::move(detail));
}

std::string num(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

void progress(std::string_view msg) { std::cerr << "  " << msg << std::endl; }

// ---------------------------------------------------------------------------------------------
// Property suite (c7)

void property_suite() {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  {  // (a) finite-difference gradients
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CounterRng rng(seed, streams::kTest);
      const Index n = 10 + rng.below(10);
      const Index f = 3 + rng.below(6);
      const int c = 2 + static_cast<int>(rng.below(3));
      Matrix raw = oracle::random_points(n, f, rng);
      std::vector<int> labels(n);
      for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<Index>(c));
      const MembershipMatrix y(labels, c);
      const Split split = stratified_split(y, 0.4, 0.2, seed);
      const Graph g = oracle::random_connected_graph(n, 0.2, rng);
      const GcnModel m = init_model(f, 2 + rng.below(6), static_cast<Index>(c), seed);
      const GcnInput x(l1_normalize(raw));
      worst = std::max(worst, oracle::gradient_relative_error(m, x, normalize_adjacency(g), y, split.train, 5e-4));
    }
    report("c7a", worst < 1e-5, "max relative gradient error over 10 instances " + num(worst, 3) + " (< 1e-5)");
  }

  {  // (b) Foster's theorem
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      CounterRng rng(1000 + seed, streams::kTest);
      const Index n = 5 + rng.below(60);
      const Graph g = oracle::random_connected_graph(n, 0.3 * rng.uniform(), rng);
      double total = 0.0;
      for (double r : effective_resistances(g)) total += r;
      worst = std::max(worst, std::abs(total - static_cast<double>(n - 1)));
    }
    report("c7b", worst < 1e-8, "max |sum R_e - (N-1)| over 50 graphs " + num(worst, 3) + " (< 1e-8)");
  }

  {  // (c) MST optimality
    int bad = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      CounterRng rng(2000 + seed, streams::kTest);
      const DistanceMatrix d = distance_matrix(oracle::random_points(6, 3, rng));
      const auto [best, edges] = oracle::brute_force_mst(d.values());
      double total = 0.0;
      for (const auto& e : kruskal_tree(d)) total += e.w;
      if (std::abs(total - best) > 1e-12 * best || oracle::edge_set(minimum_spanning_tree(d)) != edges) ++bad;
    }
    report("c7c", bad == 0, std::to_string(30 - bad) + "/30 six-node instances match the 1296-tree enumeration");
  }

  {  // (d) nesting
    Index mknn_outside = 0, boundary = 0, cknn_outside = 0, pairs = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      CounterRng rng(3000 + seed, streams::kTest);
      const Index n = 30;
      const DistanceMatrix d = distance_matrix(oracle::random_points(n, 4, rng));
      const NeighborIndex nbr(d);
      const Graph empty(n);
      for (Index k : {1, 3, 8}) {
        const Graph knn = build_knn(d, nbr, k, empty);
        const Graph mknn = build_mknn(d, nbr, k, empty);
        const Graph cknn = build_cknn(d, nbr, k, 1.0, empty);
        pairs += mknn.edge_count();
        for (const auto& e : cknn.edges())
          if (!knn.has_edge(e.u, e.v)) ++cknn_outside;
        for (const auto& e : mknn.edges()) {
          if (cknn.has_edge(e.u, e.v)) continue;
          ++mknn_outside;
          if (nbr.order(e.u)[k - 1] == e.v && nbr.order(e.v)[k - 1] == e.u) ++boundary;
        }
      }
    }
    const std::string detail = "CkNN outside kNN: " + std::to_string(cknn_outside) + "; MkNN edges outside CkNN: " +
                               std::to_string(mknn_outside) + " of " + std::to_string(pairs) + ", of which " +
                               std::to_string(boundary) + " are mutual exact k-th neighbors (strict-inequality boundary)";
    if (cknn_outside == 0 && mknn_outside == 0)
      report("c7d", Status::Pass, detail);
    else if (cknn_outside == 0 && mknn_outside == boundary)
      report("c7d", Status::Deviation, detail);
    else
      report("c7d", Status::Fail, detail);
  }

  {  // (e) RMST(0) = MST
    int bad = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      CounterRng rng(4000 + seed, streams::kTest);
      const DistanceMatrix d = distance_matrix(oracle::random_points(40, 3, rng));
      const NeighborIndex nbr(d);
      const Graph mst = minimum_spanning_tree(d);
      if (!(build_rmst(d, nbr, 0.0, 1, mst) == mst)) ++bad;
    }
    report("c7e", bad == 0, std::to_string(30 - bad) + "/30 distinct-weight instances give RMST(gamma=0) == MST");
  }

  {  // (f) row-stochastic Z and alignment range
    double worst_row = 0.0, min_align = 1.0, max_align = 0.0;
    bool finite = true;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      CounterRng rng(5000 + seed, streams::kTest);
      const Index n = 4 + rng.below(40);
      const Index f = 1 + rng.below(20);
      const double scale = std::pow(10.0, 6.0 * rng.uniform() - 3.0);
      const Matrix x = oracle::random_normal(n, f, rng) * scale;
      const Graph g = oracle::random_connected_graph(n, rng.uniform(), rng);
      const int c = 2 + static_cast<int>(rng.below(4));
      const GcnModel m = init_model(f, 1 + rng.below(16), static_cast<Index>(c), seed);
      const auto a = normalize_adjacency(g);
      CounterRng drop(seed, streams::kDropout);
      const Matrix z = forward(m, GcnInput(x), a, {0.5, &drop}).out.z;
      finite = finite && z.allFinite() && z.minCoeff() >= 0.0;
      worst_row = std::max(worst_row, (z.rowwise().sum().array() - 1.0).abs().maxCoeff());
      std::vector<int> labels(n);
      for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(c)));
      labels[0] = 0;
      labels[1] = 1;
      const MembershipMatrix y(labels, c);
      const Matrix xa = a.apply(x);
      if ((xa.rowwise() - xa.colwise().mean()).norm() == 0.0) continue;
      for (double p : default_p_grid()) {
        const double s = alignment(xa, y.values(), p);
        min_align = std::min(min_align, s);
        max_align = std::max(max_align, s);
      }
    }
    const bool ok = finite && worst_row < 1e-9 && min_align >= 0.0 && max_align <= 1.0;
    report("c7f", ok,
           "100 fuzzed instances: max |row sum - 1| " + num(worst_row, 3) + ", alignment range [" + num(min_align) +
               ", " + num(max_align) + "]");
  }

  {  // (g) RCS invariance
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CounterRng rng(6000 + seed, streams::kTest);
      const Index n = 20 + rng.below(80);
      const Matrix pts = oracle::random_normal(n, 2, rng) * 10.0;
      std::vector<int> labels(n);
      for (Index i = 0; i < n; ++i) labels[i] = i < 6 ? static_cast<int>(i / 2) : static_cast<int>(rng.below(3));
      const MembershipMatrix y(labels, 3);
      const double base = rcs(pts, y);
      const double t = 2.0 * M_PI * rng.uniform();
      Eigen::Matrix2d rot;
      rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      const Eigen::RowVector2d shift(100.0 * rng.normal(), 100.0 * rng.normal());
      const Matrix moved = (pts * rot.transpose()).rowwise() + shift;
      Matrix mirrored = pts;
      mirrored.col(1) *= -1.0;
      const double s = std::exp(4.0 * rng.uniform() - 2.0);
      worst = std::max({worst, std::abs(rcs(moved, y) - base), std::abs(rcs(mirrored, y) - base),
                        std::abs(rcs(pts * s, y) - base)});
    }
    report("c7g", worst < 1e-10, "max RCS change under rotation, reflection, translation, scaling " + num(worst, 3) +
                                     " (< 1e-10)");
  }

  {  // (h) audit sparsifier
    CounterRng rng(7000, streams::kTest);
    const Graph g = oracle::random_connected_graph(50, 0.3, rng);
    SparsifyConfig cfg;
    cfg.sigma = 0.5;
    cfg.seed = 0;
    const Sparsifier sp = sssa_sparsify(g, cfg);
    const Matrix l = laplacian(g);
    const Matrix lt = weighted_laplacian(50, sp.support.edges(), sp.weights);
    int inside = 0;
    for (int t = 0; t < 100; ++t) {
      Vector x(50);
      for (Eigen::Index i = 0; i < 50; ++i) x(i) = rng.normal();
      x.normalize();
      const double ratio = x.dot(lt * x) / x.dot(l * x);
      inside += ratio >= 0.5 && ratio <= 1.5;
    }
    report("c7h", inside >= 95,
           std::to_string(inside) + "/100 random unit vectors within (1 +- 0.5) on a 50-node graph (" +
               std::to_string(sp.support.edge_count()) + " of " + std::to_string(g.edge_count()) + " edges kept)");
  }

  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  progress("property suite took " + num(secs, 3) + " s");
}

// ---------------------------------------------------------------------------------------------
// Determinism (c8)

nlohmann::json read_json(const fs::path& p) {
  auto in = open_input(p);
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  auto in = open_input(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism(const fs::path& cli, const fs::path& work) {
  if (cli.empty() || !fs::exists(cli)) {
    report("c8", Status::Skip, "geograph executable not given");
    return;
  }
  fs::remove_all(work);
  fs::create_directories(work);
  {
    std::ofstream cfg(work / "config.toml");
    cfg << "[dataset]\nsource = \"constructive\"\ngenerator_seed = 5\nclusters = 4\nfeatures_per_cluster = 15\n"
           "per_cluster = 40\np_in = 0.15\np_out = 0.02\ntrain_frac = 0.1\nval_frac = 0.1\n\n"
           "[methods]\nconstruct = [\"knn\", \"mknn\", \"cknn\", \"rmst\"]\n\n[gcn]\nepochs = 120\n\n"
           "[sweep]\ngrid_size = 4\ntsne_perplexity = 10\ntsne_iterations = 150\n\n[sparsify]\ngrid_size = 4\n\n"
           "[seeds]\ncount = 3\n";
  }
  const std::string run_a = "\"" + cli.string() + "\" experiment --quiet --threads 1 --config \"" +
                            (work / "config.toml").string() + "\" --out \"" + (work / "a").string() + "\"";
  const std::string run_b = "\"" + cli.string() + "\" experiment --quiet --threads 3 --config \"" +
                            (work / "config.toml").string() + "\" --out \"" + (work / "b").string() + "\"";
  if (std::system(run_a.c_str()) != 0 || std::system(run_b.c_str()) != 0) {
    report("c8", Status::Fail, "experiment run failed");
    return;
  }
  auto a = read_json(work / "a" / "report.json");
  auto b = read_json(work / "b" / "report.json");
  a.erase("generated_at");
  b.erase("generated_at");
  const bool same_report = a.dump() == b.dump();
  int differing = 0, files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(work / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "report.json") continue;
    ++files;
    const fs::path other = work / "b" / fs::relative(entry.path(), work / "a");
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
  }
  report("c8", same_report && differing == 0,
         std::string("report.json ") + (same_report ? "identical" : "differs") + " apart from generated_at; " +
             std::to_string(files - differing) + "/" + std::to_string(files) +
             " other output files byte-identical (runs with 1 and 3 worker threads)");
}

// ---------------------------------------------------------------------------------------------
// Dataset criteria (c1 to c6)

struct Settings {
  fs::path data_dir;
  fs::path config_dir;
  fs::path cache_dir;
  Index grid_size = 15;
  unsigned threads = 0;
};

bool has_files(const Settings& s, const std::string& name) {
  return fs::exists(s.data_dir / name / "features.csv") && fs::exists(s.data_dir / name / "labels.csv");
}

ExperimentConfig dataset_config(const Settings& s, const std::string& name) {
  ExperimentConfig cfg = load_config(s.config_dir / (name + ".toml"));
  if (cfg.dataset.source == "files") {
    cfg.dataset.features = s.data_dir / name / "features.csv";
    cfg.dataset.labels = s.data_dir / name / "labels.csv";
    const fs::path split = s.data_dir / name / "split.json";
    cfg.dataset.split = fs::exists(split) ? std::optional<fs::path>(split) : std::nullopt;
  }
  cfg.methods = {Method::Cknn};
  cfg.sweep.grid_size = s.grid_size;
  cfg.sweep.rcs = false;
  cfg.sparsify.enabled = false;
  cfg.sparsify.grid_size = s.grid_size;
  cfg.threads = s.threads;
  return cfg;
}

// Runs the experiment, or reuses an earlier report produced with the same effective config.
ExperimentReport run_cached(const Settings& s, const std::string& name, const ExperimentConfig& cfg) {
  const fs::path dir = s.cache_dir / name;
  const fs::path report_path = dir / "report.json";
  if (fs::exists(report_path)) {
    try {
      ExperimentReport cached = parse_report(report_path);
      if (cached.config == to_json(cfg)) {
        progress(name + ": reusing " + report_path.string());
        return cached;
      }
    } catch (const Error&) {
    }
  }
  progress(name + ": running (grid " + std::to_string(cfg.sweep.grid_size) + ", " +
           std::to_string(cfg.seeds.size()) + " seeds)");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r = run_experiment(cfg, dir, [&](std::string_view line) { progress(name + ": " + std::string(line)); });
  progress(name + ": finished in " +
           num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0, 3) + " min");
  return r;
}

const SweepRecord* baseline(const ExperimentReport& r, const std::string& method) {
  for (const auto& b : r.baselines)
    if (b.method == method) return &b;
  return nullptr;
}

const MethodSweep* sweep(const ExperimentReport& r, const std::string& method) {
  for (const auto& m : r.sweeps)
    if (m.method == method) return &m;
  return nullptr;
}

void dataset_criteria(const Settings& s) {
  std::map<std::string, ExperimentReport> reports;

  // c1: MLP and CkNN accuracy against the reference values
  struct Row {
    std::string name;
    double mlp;
    double cknn;
  };
  const std::vector<Row> table{{"constructive", 42.1, 51.1}, {"digits", 82.0, 93.4}, {"segmentation", 72.0, 83.9}};
  std::vector<std::string> missing;
  for (const auto& row : table)
    if (row.name != "constructive" && !has_files(s, row.name)) missing.push_back(row.name);
  for (const auto& row : table) {
    if (row.name != "constructive" && !has_files(s, row.name)) continue;
    reports[row.name] = run_cached(s, row.name, dataset_config(s, row.name));
  }
  {
    bool ok = true;
    std::string detail;
    for (const auto& row : table) {
      if (!reports.count(row.name)) continue;
      const auto& r = reports[row.name];
      const double mlp = 100.0 * baseline(r, "mlp")->test_acc_mean;
      const double cknn = 100.0 * sweep(r, "cknn")->optimum.test_acc_mean;
      const bool row_ok = std::abs(mlp - row.mlp) <= 3.0 && std::abs(cknn - row.cknn) <= 3.0;
      ok = ok && row_ok;
      detail += row.name + " MLP " + num(mlp, 3) + " (" + num(row.mlp, 3) + ") CkNN " + num(cknn, 3) + " (" +
                num(row.cknn, 3) + ")" + (row_ok ? "" : " out of range") + "; ";
    }
    detail += "+-3 points, " + std::to_string(s.grid_size) + "-point CkNN grid, 10 seeds";
    if (!missing.empty()) {
      std::string names;
      for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
      report("c1", Status::Skip, "data missing for " + names + " under " + s.data_dir.string() + "; " + detail);
    } else {
      report("c1", ok, detail);
    }
  }

  // c2 to c5: AMiner
  const bool aminer = has_files(s, "aminer");
  if (aminer) {
    ExperimentConfig cfg = dataset_config(s, "aminer");
    cfg.sweep.rcs = true;
    const Dataset ds = load_dataset(cfg.dataset);
    GraphContext ctx(distance_matrix(ds.features));
    const double cknn = edge_density(build_graph(ctx, Method::Cknn, 199));
    const double knn = edge_density(build_graph(ctx, Method::Knn, 8));
    const bool ok = std::abs(cknn - 0.03852) <= 0.001 && std::abs(knn - 0.00748) <= 0.0005;
    report("c2", ok, "CkNN k=199 density " + num(cknn, 5) + " (0.03852 +- 0.001), kNN k=8 density " + num(knn, 5) +
                         " (0.00748 +- 0.0005)");
    reports["aminer"] = run_cached(s, "aminer", cfg);
  } else {
    report("c2", Status::Skip, "AMiner data not found under " + (s.data_dir / "aminer").string());
  }

  if (aminer) {
    const auto& r = reports["aminer"];
    const auto& sw = *sweep(r, "cknn");
    const double mlp_val = baseline(r, "mlp")->val_acc_mean;
    const auto& peak = sw.optimum;
    const auto& densest = sw.records.back();
    const bool rises = peak.val_acc_mean > mlp_val && sw.records.front().val_acc_mean < peak.val_acc_mean;
    const bool ok = rises && std::abs(peak.edge_density - 0.039) <= 0.015 &&
                    densest.val_acc_mean <= peak.val_acc_mean - 0.10;
    report("c3", ok,
           "MLP val " + num(100 * mlp_val, 3) + ", first point " + num(100 * sw.records.front().val_acc_mean, 3) +
               ", peak " + num(100 * peak.val_acc_mean, 3) + " at density " + num(peak.edge_density, 3) +
               " (0.039 +- 0.015), densest " + num(100 * densest.val_acc_mean, 3) + " (>= 10 below peak)");

    if (sw.p_star_correlation)
      report("c4a", *sw.p_star_correlation >= 0.9,
             "alignment/validation correlation " + num(*sw.p_star_correlation, 3) + " at p* = " + num(*sw.p_star, 2) +
                 " (>= 0.9)");
    else
      report("c4a", Status::Fail, "p* undefined on the AMiner sweep");

    std::vector<double> rc, val;
    for (const auto& rec : sw.records)
      if (rec.rcs_mean) {
        rc.push_back(*rec.rcs_mean);
        val.push_back(rec.val_acc_mean);
      }
    try {
      const double c = pearson(rc, val);
      report("c5", c >= 0.9, "RCS/validation correlation " + num(c, 3) + " over " + std::to_string(rc.size()) +
                                 " sweep points (>= 0.9)");
    } catch (const Error& e) {
      report("c5", Status::Fail, std::string("correlation undefined: ") + e.what());
    }
  } else {
    report("c3", Status::Skip, "AMiner data not found");
    report("c4a", Status::Skip, "AMiner data not found");
  }

  {  // c4b: average over every dataset run here
    double sum = 0.0;
    int defined = 0;
    std::string detail;
    for (const auto& [name, r] : reports) {
      const auto* sw = sweep(r, "cknn");
      if (sw && sw->p_star_correlation) {
        sum += *sw->p_star_correlation;
        ++defined;
        detail += name + " " + num(*sw->p_star_correlation, 3) + " (p*=" + num(*sw->p_star, 2) + "); ";
      } else {
        detail += name + " undefined; ";
      }
    }
    if (reports.empty()) {
      report("c4b", Status::Skip, "no dataset was run");
    } else {
      const double avg = defined ? sum / defined : 0.0;
      report("c4b", defined == static_cast<int>(reports.size()) && avg >= 0.75,
             detail + "average " + num(avg, 3) + " over " + std::to_string(defined) + " datasets (>= 0.75)");
    }
  }

  if (!aminer) report("c5", Status::Skip, "AMiner data not found");

  // c6: Cell sparsification
  if (has_files(s, "cell")) {
    ExperimentConfig cfg = dataset_config(s, "cell");
    cfg.sparsify.enabled = true;
    cfg.sparsify.method = "cknn";
    const auto r = run_cached(s, "cell-sparsify", cfg);
    const auto& st = r.sparsification.front();
    const bool ok = st.selected.mean_degree <= 8.0 && st.selected.test_acc_mean >= st.base.test_acc_mean - 0.005;
    report("c6", ok,
           "selected mean degree " + num(st.selected.mean_degree, 3) + " (<= 8) from " + num(st.base.mean_degree, 3) +
               ", test " + num(100 * st.selected.test_acc_mean, 3) + " vs unsparsified " +
               num(100 * st.base.test_acc_mean, 3) + " (>= base - 0.5)");
  } else {
    report("c6", Status::Skip, "Cell data not found under " + (s.data_dir / "cell").string());
  }
}

fs::path env_or(const char* name, const fs::path& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? fs::path(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string group = "all";
  Settings s;
  fs::path cli;
  fs::path source_dir = GEOGRAPH_SOURCE_DIR;
  app.add_option("--group", group)->check(CLI::IsMember({"all", "properties", "determinism", "datasets"}));
  app.add_option("--data-dir", s.data_dir, "Dataset root (default: $GEOGRAPH_DATA_DIR or <source>/data)");
  app.add_option("--cache-dir", s.cache_dir, "Where experiment reports are written and reused");
  app.add_option("--cli", cli, "geograph executable, for the determinism check");
  app.add_option("--grid-size", s.grid_size)->capture_default_str();
  app.add_option("--threads", s.threads)->capture_default_str();
  std::vector<std::string> known;
  app.add_option("--known-failure", known, "Criterion whose FAIL is still printed but not counted in the exit code");
  CLI11_PARSE(app, argc, argv);

  if (s.data_dir.empty()) s.data_dir = env_or("GEOGRAPH_DATA_DIR", source_dir / "data");
  if (s.cache_dir.empty()) s.cache_dir = fs::temp_directory_path() / "geograph_acceptance";
  s.config_dir = source_dir / "configs";

  try {
    if (group == "all" || group == "datasets") dataset_criteria(s);
    if (group == "all" || group == "properties") property_suite();
    if (group == "all" || group == "determinism") determinism(cli, s.cache_dir / "determinism");
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << std::endl;
    return 1;
  }

  bool failed = false, all_skipped = true;
  std::string excused;
  for (const auto& l : lines) {
    const bool is_known = std::find(known.begin(), known.end(), l.id) != known.end();
    if (l.status == Status::Fail && is_known) excused += (excused.empty() ? "" : ", ") + l.id;
    failed = failed || (l.status == Status::Fail && !is_known);
    all_skipped = all_skipped && l.status == Status::Skip;
  }
  if (!excused.empty()) std::cout << "known failures not counted in the exit code: " << excused << std::endl;
  if (failed) return 1;
  return all_skipped ? 77 : 0;
}
