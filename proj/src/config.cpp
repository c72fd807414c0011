#include "geograph/config.hpp"

#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "geograph/error.hpp"

namespace geograph {

namespace fs = std::filesystem;

namespace {

// Typed access to one TOML table that remembers which keys were read, so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  bool present() const { return table_ != nullptr; }

  template <typename T>
  std::optional<T> get(std::string_view key) {
    const toml::node* node = lookup(key);
    if (!node) return std::nullopt;
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = node->value<double>()) return *v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (node->is_boolean()) return node->as_boolean()->get();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (node->is_string()) return node->as_string()->get();
    } else {
      if (node->is_integer()) {
        const auto v = node->as_integer()->get();
        if constexpr (std::is_unsigned_v<T>) {
          if (v < 0) fail(key, "must be nonnegative");
        }
        return static_cast<T>(v);
      }
    }
    fail(key, "has the wrong type");
  }

  template <typename T>
  void read(std::string_view key, T& out) {
    if (auto v = get<T>(key)) out = *v;
  }

  template <typename T>
  std::optional<std::vector<T>> get_array(std::string_view key) {
    const toml::node* node = lookup(key);
    if (!node) return std::nullopt;
    const auto* arr = node->as_array();
    if (!arr) fail(key, "must be an array");
    std::vector<T> out;
    for (const auto& item : *arr) {
      if constexpr (std::is_same_v<T, double>) {
        auto v = item.value<double>();
        if (!v) fail(key, "must hold numbers");
        out.push_back(*v);
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!item.is_string()) fail(key, "must hold strings");
        out.push_back(item.as_string()->get());
      } else {
        if (!item.is_integer() || item.as_integer()->get() < 0) fail(key, "must hold nonnegative integers");
        out.push_back(static_cast<T>(item.as_integer()->get()));
      }
    }
    return out;
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [key, node] : *table_) {
      if (!used_.contains(std::string(key.str()))) throw ConfigError("unknown key " + name_ + "." + std::string(key.str()));
    }
  }

  [[noreturn]] void fail(std::string_view key, std::string_view what) const {
    throw ConfigError(name_ + "." + std::string(key) + " " + std::string(what));
  }

 private:
  const toml::node* lookup(std::string_view key) {
    if (!table_) return nullptr;
    used_.insert(std::string(key));
    return table_->get(key);
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ExperimentConfig parse_config(std::string_view toml_text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "invalid TOML at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  static const std::set<std::string> sections = {"dataset", "methods", "gcn", "sweep", "sparsify", "seeds"};
  for (const auto& [key, node] : root) {
    if (!sections.contains(std::string(key.str()))) throw ConfigError("unknown section [" + std::string(key.str()) + "]");
    if (!node.is_table()) throw ConfigError("[" + std::string(key.str()) + "] must be a table");
  }

  ExperimentConfig cfg;
  Section ds(root["dataset"].as_table(), "dataset");
  if (!ds.present()) throw ConfigError("missing [dataset] section");
  {
    auto& d = cfg.dataset;
    ds.read("source", d.source);
    if (d.source != "files" && d.source != "constructive") ds.fail("source", "must be \"files\" or \"constructive\"");
    ds.read("name", d.name);
    if (auto v = ds.get<std::string>("features")) d.features = resolve(base_dir, *v);
    if (auto v = ds.get<std::string>("labels")) d.labels = resolve(base_dir, *v);
    if (auto v = ds.get<std::string>("split")) d.split = resolve(base_dir, *v);
    ds.read("header", d.header);
    if (auto v = ds.get<std::string>("delimiter")) {
      if (v->size() != 1) ds.fail("delimiter", "must be a single character");
      d.delimiter = v->front();
    }
    if (auto v = ds.get<int>("n_classes")) d.n_classes = *v;
    ds.read("train_frac", d.train_frac);
    ds.read("val_frac", d.val_frac);
    if (auto v = ds.get<Index>("train_count")) d.train_count = *v;
    if (auto v = ds.get<Index>("val_count")) d.val_count = *v;
    ds.read("generator_seed", d.generator_seed);
    d.split_seed = d.generator_seed;
    ds.read("split_seed", d.split_seed);
    ds.read("clusters", d.constructive.n_clusters);
    ds.read("features_per_cluster", d.constructive.features_per_cluster);
    ds.read("p_in", d.constructive.p_in);
    ds.read("p_out", d.constructive.p_out);
    ds.read("per_cluster", d.constructive.samples_per_cluster);
    if (d.name.empty()) d.name = d.source == "constructive" ? "constructive" : d.features.parent_path().filename().string();
    ds.finish();
  }

  Section methods(root["methods"].as_table(), "methods");
  if (auto names = methods.get_array<std::string>("construct")) {
    cfg.methods.clear();
    for (const auto& n : *names) {
      try {
        cfg.methods.push_back(parse_method(n));
      } catch (const ParamError&) {
        methods.fail("construct", "has unknown method '" + n + "'");
      }
    }
  }
  methods.read("mlp", cfg.mlp);
  methods.read("knnc", cfg.knnc);
  methods.finish();

  Section gcn(root["gcn"].as_table(), "gcn");
  gcn.read("epochs", cfg.gcn.epochs);
  gcn.read("learning_rate", cfg.gcn.learning_rate);
  gcn.read("dropout", cfg.gcn.dropout);
  gcn.read("l2", cfg.gcn.l2);
  gcn.read("early_stop_window", cfg.gcn.early_stop_window);
  gcn.read("hidden", cfg.gcn.hidden);
  gcn.finish();

  Section sweep(root["sweep"].as_table(), "sweep");
  sweep.read("grid_size", cfg.sweep.grid_size);
  sweep.read("alignment", cfg.sweep.alignment);
  sweep.read("rcs", cfg.sweep.rcs);
  if (auto g = sweep.get_array<double>("p_grid")) cfg.sweep.p_grid = *g;
  sweep.read("tsne_perplexity", cfg.sweep.tsne.perplexity);
  sweep.read("tsne_iterations", cfg.sweep.tsne.iterations);
  sweep.read("threads", cfg.threads);
  sweep.finish();

  Section sp(root["sparsify"].as_table(), "sparsify");
  sp.read("enabled", cfg.sparsify.enabled);
  sp.read("method", cfg.sparsify.method);
  sp.read("grid_size", cfg.sparsify.grid_size);
  sp.read("oversample_c", cfg.sparsify.oversample_c);
  sp.read("seed", cfg.sparsify.seed);
  sp.read("top_n", cfg.sparsify.top_n);
  sp.finish();

  Section seeds(root["seeds"].as_table(), "seeds");
  auto values = seeds.get_array<std::uint64_t>("values");
  auto count = seeds.get<std::uint64_t>("count");
  auto start = seeds.get<std::uint64_t>("start");
  if (values && (count || start)) seeds.fail("values", "cannot be combined with count/start");
  if (values) {
    cfg.seeds = *values;
  } else if (count || start) {
    cfg.seeds.clear();
    for (std::uint64_t i = 0; i < count.value_or(10); ++i) cfg.seeds.push_back(start.value_or(0) + i);
  }
  seeds.finish();

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

void validate(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  if (d.source == "files" && (d.features.empty() || d.labels.empty()))
    throw ConfigError("dataset.features and dataset.labels are required for file datasets");
  if (!(d.train_frac > 0.0 && d.val_frac >= 0.0 && d.train_frac + d.val_frac < 1.0))
    throw ConfigError("dataset.train_frac/val_frac must be positive and sum below 1");
  if (d.train_count && *d.train_count == 0) throw ConfigError("dataset.train_count must be positive");
  if (d.n_classes && *d.n_classes < 1) throw ConfigError("dataset.n_classes must be positive");
  try {
    validate(cfg.gcn);
  } catch (const ParamError& e) {
    throw ConfigError(std::string("gcn: ") + e.what());
  }
  if (cfg.sweep.grid_size < 2 || cfg.sweep.grid_size > 50) throw ConfigError("sweep.grid_size must lie in [2, 50]");
  for (double p : cfg.sweep.p_grid)
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("sweep.p_grid entries must lie in (0, 1]");
  if (cfg.sweep.p_grid.empty()) throw ConfigError("sweep.p_grid must not be empty");
  if (!(cfg.sweep.tsne.perplexity > 0.0)) throw ConfigError("sweep.tsne_perplexity must be positive");
  if (cfg.sweep.tsne.iterations < 0) throw ConfigError("sweep.tsne_iterations must be nonnegative");
  if (cfg.sparsify.grid_size < 2) throw ConfigError("sparsify.grid_size must be at least 2");
  if (!(cfg.sparsify.oversample_c > 0.0)) throw ConfigError("sparsify.oversample_c must be positive");
  if (cfg.sparsify.top_n < 1) throw ConfigError("sparsify.top_n must be at least 1");
  if (cfg.sparsify.enabled) {
    try {
      const Method m = parse_method(cfg.sparsify.method);
      if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end())
        throw ConfigError("sparsify.method must be one of methods.construct");
    } catch (const ParamError&) {
      throw ConfigError("sparsify.method is not a construction method");
    }
  }
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  nlohmann::json j;
  j["dataset"] = {{"name", d.name}, {"source", d.source}, {"train_frac", d.train_frac}, {"val_frac", d.val_frac},
                  {"split_seed", d.split_seed}};
  if (d.train_count) j["dataset"]["train_count"] = *d.train_count;
  if (d.val_count) j["dataset"]["val_count"] = *d.val_count;
  if (d.source == "files") {
    // File names only, so reports do not depend on where the data lives.
    j["dataset"]["features"] = d.features.filename().string();
    j["dataset"]["labels"] = d.labels.filename().string();
    j["dataset"]["split"] = d.split ? nlohmann::json(d.split->filename().string()) : nlohmann::json(nullptr);
  } else {
    j["dataset"]["clusters"] = d.constructive.n_clusters;
    j["dataset"]["features_per_cluster"] = d.constructive.features_per_cluster;
    j["dataset"]["p_in"] = d.constructive.p_in;
    j["dataset"]["p_out"] = d.constructive.p_out;
    j["dataset"]["per_cluster"] = d.constructive.samples_per_cluster;
    j["dataset"]["generator_seed"] = d.generator_seed;
  }
  std::vector<std::string> names;
  for (Method m : cfg.methods) names.push_back(to_string(m));
  j["methods"] = {{"construct", names}, {"mlp", cfg.mlp}, {"knnc", cfg.knnc}};
  j["gcn"] = {{"epochs", cfg.gcn.epochs},
              {"learning_rate", cfg.gcn.learning_rate},
              {"dropout", cfg.gcn.dropout},
              {"l2", cfg.gcn.l2},
              {"early_stop_window", cfg.gcn.early_stop_window},
              {"hidden", cfg.gcn.hidden}};
  j["sweep"] = {{"grid_size", cfg.sweep.grid_size},
                {"alignment", cfg.sweep.alignment},
                {"rcs", cfg.sweep.rcs},
                {"p_grid", cfg.sweep.p_grid},
                {"tsne_perplexity", cfg.sweep.tsne.perplexity},
                {"tsne_iterations", cfg.sweep.tsne.iterations}};
  j["sparsify"] = {{"enabled", cfg.sparsify.enabled},       {"method", cfg.sparsify.method},
                   {"grid_size", cfg.sparsify.grid_size},   {"oversample_c", cfg.sparsify.oversample_c},
                   {"seed", cfg.sparsify.seed},             {"top_n", cfg.sparsify.top_n}};
  j["seeds"] = cfg.seeds;
  return j;
}

Dataset load_dataset(const DatasetConfig& cfg) {
  Dataset ds;
  if (cfg.source == "constructive") {
    ds = generate_constructive(cfg.constructive, cfg.generator_seed);
    const auto n = static_cast<double>(ds.size());
    ds.split = stratified_split_sized(ds.labels, cfg.train_count.value_or(std::llround(cfg.train_frac * n)),
                                      cfg.val_count.value_or(std::llround(cfg.val_frac * n)), cfg.split_seed);
  } else {
    LoadOptions opts;
    opts.csv.header = cfg.header;
    opts.csv.delimiter = cfg.delimiter;
    opts.n_classes = cfg.n_classes;
    opts.train_frac = cfg.train_frac;
    opts.val_frac = cfg.val_frac;
    opts.train_count = cfg.train_count;
    opts.val_count = cfg.val_count;
    opts.name = cfg.name;
    ds = load_dataset(cfg.features, cfg.labels, cfg.split, cfg.split_seed, opts);
  }
  if (!cfg.name.empty()) ds.name = cfg.name;
  return ds;
}

}  // namespace geograph
