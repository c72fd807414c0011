#include "geograph/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "geograph/error.hpp"
#include "geograph/io.hpp"

namespace geograph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

json to_json(const SweepRecord& r) {
  json j;
  j["method"] = r.method;
  j["param"] = r.param;
  j["edge_density"] = r.edge_density;
  j["mean_degree"] = r.mean_degree;
  j["edge_count"] = r.edge_count;
  j["val_acc_mean"] = r.val_acc_mean;
  j["val_acc_std"] = r.val_acc_std;
  j["test_acc_mean"] = r.test_acc_mean;
  j["test_acc_std"] = r.test_acc_std;
  j["alignment"] = opt(r.alignment);
  j["rcs_mean"] = opt(r.rcs_mean);
  j["rcs_std"] = opt(r.rcs_std);
  j["runs"] = r.runs;
  j["failed_runs"] = r.failed_runs;
  j["sigma"] = opt(r.sigma);
  j["q"] = opt(r.q);
  j["connected"] = opt(r.connected);
  return j;
}

SweepRecord sweep_record_from_json(const json& j) {
  SweepRecord r;
  r.method = j.at("method").get<std::string>();
  r.param = j.at("param").get<double>();
  r.edge_density = j.at("edge_density").get<double>();
  r.mean_degree = j.at("mean_degree").get<double>();
  r.edge_count = j.at("edge_count").get<Index>();
  r.val_acc_mean = j.at("val_acc_mean").get<double>();
  r.val_acc_std = j.at("val_acc_std").get<double>();
  r.test_acc_mean = j.at("test_acc_mean").get<double>();
  r.test_acc_std = j.at("test_acc_std").get<double>();
  r.alignment = read_opt<double>(j, "alignment");
  r.rcs_mean = read_opt<double>(j, "rcs_mean");
  r.rcs_std = read_opt<double>(j, "rcs_std");
  r.runs = j.at("runs").get<int>();
  r.failed_runs = j.at("failed_runs").get<int>();
  r.sigma = read_opt<double>(j, "sigma");
  r.q = read_opt<std::uint64_t>(j, "q");
  r.connected = read_opt<bool>(j, "connected");
  return r;
}

json to_json(const ExperimentReport& r) {
  json j;
  j["dataset"] = r.dataset;
  j["generated_at"] = r.generated_at;
  j["samples"] = {{"n", r.n_samples},         {"features", r.n_features}, {"classes", r.n_classes},
                  {"train", r.n_train},       {"validation", r.n_validation}, {"test", r.n_test}};
  j["seeds"] = r.seeds;
  j["baselines"] = json::array();
  for (const auto& b : r.baselines) j["baselines"].push_back(to_json(b));
  j["sweeps"] = json::array();
  for (const auto& s : r.sweeps) {
    json js;
    js["method"] = s.method;
    js["records"] = json::array();
    for (const auto& rec : s.records) js["records"].push_back(to_json(rec));
    js["optimum"] = to_json(s.optimum);
    js["p_star"] = opt(s.p_star);
    js["p_star_correlation"] = opt(s.p_star_correlation);
    js["p_correlations"] = json::array();
    for (const auto& c : s.p_correlations) js["p_correlations"].push_back(opt(c));
    j["sweeps"].push_back(js);
  }
  j["sparsification"] = json::array();
  for (const auto& s : r.sparsification) {
    json js;
    js["method"] = s.method;
    js["rank"] = s.rank;
    js["base"] = to_json(s.base);
    js["records"] = json::array();
    for (const auto& rec : s.records) js["records"].push_back(to_json(rec));
    js["selected"] = to_json(s.selected);
    j["sparsification"].push_back(js);
  }
  j["config"] = r.config;
  return j;
}

ExperimentReport report_from_json(const json& j) {
  try {
    ExperimentReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.generated_at = j.at("generated_at").get<std::string>();
    const auto& s = j.at("samples");
    r.n_samples = s.at("n").get<Index>();
    r.n_features = s.at("features").get<Index>();
    r.n_classes = s.at("classes").get<int>();
    r.n_train = s.at("train").get<Index>();
    r.n_validation = s.at("validation").get<Index>();
    r.n_test = s.at("test").get<Index>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& b : j.at("baselines")) r.baselines.push_back(sweep_record_from_json(b));
    for (const auto& js : j.at("sweeps")) {
      MethodSweep m;
      m.method = js.at("method").get<std::string>();
      for (const auto& rec : js.at("records")) m.records.push_back(sweep_record_from_json(rec));
      m.optimum = sweep_record_from_json(js.at("optimum"));
      m.p_star = read_opt<double>(js, "p_star");
      m.p_star_correlation = read_opt<double>(js, "p_star_correlation");
      for (const auto& c : js.at("p_correlations"))
        m.p_correlations.push_back(c.is_null() ? std::nullopt : std::optional<double>(c.get<double>()));
      r.sweeps.push_back(std::move(m));
    }
    for (const auto& js : j.at("sparsification")) {
      SparsificationStudy st;
      st.method = js.at("method").get<std::string>();
      st.rank = js.at("rank").get<int>();
      st.base = sweep_record_from_json(js.at("base"));
      for (const auto& rec : js.at("records")) st.records.push_back(sweep_record_from_json(rec));
      st.selected = sweep_record_from_json(js.at("selected"));
      r.sparsification.push_back(std::move(st));
    }
    r.config = j.at("config");
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid report: ") + e.what());
  }
}

void write_sweep_csv(std::span<const SweepRecord> records, const fs::path& path) {
  auto out = open_output(path);
  out << "param,density,mean_degree,edge_count,val_acc_mean,val_acc_std,test_acc_mean,test_acc_std,"
         "alignment,rcs_mean,rcs_std,runs,failed_runs,sigma,q,connected\n";
  for (const auto& r : records) {
    out << format_double(r.param) << ',' << format_double(r.edge_density) << ',' << format_double(r.mean_degree) << ','
        << r.edge_count << ',' << format_double(r.val_acc_mean) << ',' << format_double(r.val_acc_std) << ','
        << format_double(r.test_acc_mean) << ',' << format_double(r.test_acc_std) << ',' << cell(r.alignment) << ','
        << cell(r.rcs_mean) << ',' << cell(r.rcs_std) << ',' << r.runs << ',' << r.failed_runs << ',' << cell(r.sigma)
        << ',' << (r.q ? std::to_string(*r.q) : std::string()) << ','
        << (r.connected ? (*r.connected ? "true" : "false") : "") << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void emit_report(const ExperimentReport& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  {
    auto out = open_output(dir / "report.json");
    out << to_json(r).dump(2) << '\n';
    if (!out) throw IoError("write failed for " + (dir / "report.json").string());
  }
  {
    auto out = open_output(dir / "summary.csv");
    out << "dataset,method,param,density,mean_degree,val_acc_mean,val_acc_std,test_acc_mean,test_acc_std\n";
    auto row = [&](const SweepRecord& rec) {
      out << r.dataset << ',' << rec.method << ',' << format_double(rec.param) << ',' << format_double(rec.edge_density)
          << ',' << format_double(rec.mean_degree) << ',' << format_double(rec.val_acc_mean) << ','
          << format_double(rec.val_acc_std) << ',' << format_double(rec.test_acc_mean) << ','
          << format_double(rec.test_acc_std) << '\n';
    };
    for (const auto& s : r.sweeps) row(s.optimum);
    for (const auto& b : r.baselines) row(b);
    if (!out) throw IoError("write failed for " + (dir / "summary.csv").string());
  }
  for (const auto& s : r.sweeps) write_sweep_csv(s.records, dir / ("sweep_" + s.method + ".csv"));
  for (const auto& s : r.sparsification)
    write_sweep_csv(s.records, dir / ("sparsify_" + s.method + "_" + std::to_string(s.rank) + ".csv"));

  json diag = json::array();
  for (const auto& s : r.sweeps) {
    json d;
    d["method"] = s.method;
    d["p_star"] = opt(s.p_star);
    d["p_star_correlation"] = opt(s.p_star_correlation);
    d["points"] = json::array();
    for (const auto& rec : s.records) {
      d["points"].push_back({{"param", rec.param},
                             {"density", rec.edge_density},
                             {"alignment", opt(rec.alignment)},
                             {"rcs_mean", opt(rec.rcs_mean)},
                             {"rcs_std", opt(rec.rcs_std)},
                             {"val_acc_mean", rec.val_acc_mean},
                             {"val_acc_std", rec.val_acc_std}});
    }
    diag.push_back(d);
  }
  auto out = open_output(dir / "diagnostics.json");
  out << diag.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + (dir / "diagnostics.json").string());
}

ExperimentReport parse_report(const fs::path& report_json) {
  auto in = open_input(report_json);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(report_json.string() + ": " + e.what());
  }
  return report_from_json(j);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace geograph
