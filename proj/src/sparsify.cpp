#include "geograph/sparsify.hpp"

#include <Eigen/Cholesky>
#include <boost/random/binomial_distribution.hpp>
#include <json.hpp>

#include <cmath>

#include "geograph/error.hpp"
#include "geograph/io.hpp"
#include "geograph/rng.hpp"

namespace geograph {

Matrix laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Matrix l = Matrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    l(e.u, e.v) -= 1.0;
    l(e.v, e.u) -= 1.0;
    l(e.u, e.u) += 1.0;
    l(e.v, e.v) += 1.0;
  }
  return l;
}

Matrix weighted_laplacian(Index n, std::span<const Edge> edges, std::span<const double> weights) {
  if (edges.size() != weights.size()) throw ShapeError("one weight per edge expected");
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix l = Matrix::Zero(nn, nn);
  for (Index i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    if (u >= n || v >= n) throw ParamError("edge endpoint out of range");
    const double w = weights[i];
    l(u, v) -= w;
    l(v, u) -= w;
    l(u, u) += w;
    l(v, v) += w;
  }
  return l;
}

std::vector<double> effective_resistances(const Graph& g) {
  if (g.n() < 2 || !g.is_connected()) throw ConnectivityError("effective resistances need a connected graph");
  const auto n = static_cast<Eigen::Index>(g.n());
  Matrix shifted = laplacian(g);
  shifted.array() += 1.0 / static_cast<double>(n);
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) throw DegenerateError("shifted Laplacian is not positive definite");
  const Matrix m = llt.solve(Matrix::Identity(n, n));
  std::vector<double> r;
  r.reserve(g.edge_count());
  for (const auto& e : g.edges()) r.push_back(m(e.u, e.u) + m(e.v, e.v) - m(e.u, e.v) - m(e.v, e.u));
  return r;
}

std::uint64_t sample_count(Index n, double sigma, double oversample_c) {
  const double q = std::ceil(oversample_c * static_cast<double>(n) * std::log(static_cast<double>(n)) / (sigma * sigma));
  constexpr double cap = 4611686018427387904.0;  // 2^62
  if (!(q < cap)) return static_cast<std::uint64_t>(cap);
  return static_cast<std::uint64_t>(std::max(q, 1.0));
}

Sparsifier sssa_sparsify(const Graph& g, const SparsifyConfig& cfg) {
  return sssa_sparsify(g, effective_resistances(g), cfg);
}

Sparsifier sssa_sparsify(const Graph& g, std::span<const double> resistances, const SparsifyConfig& cfg) {
  if (!(cfg.sigma > 0.0 && cfg.sigma <= 1.0)) throw ParamError("sigma must lie in (0, 1]");
  if (!(cfg.oversample_c > 0.0)) throw ParamError("oversampling constant must be positive");
  if (resistances.size() != g.edge_count()) throw ShapeError("one resistance per edge expected");
  if (g.n() < 2 || !g.is_connected()) throw ConnectivityError("sparsification needs a connected graph");

  const Index m = g.edge_count();
  double total = 0.0;
  for (double r : resistances) {
    if (!(r > 0.0)) throw ParamError("effective resistances must be positive");
    total += r;
  }
  std::vector<double> p(m);
  for (Index e = 0; e < m; ++e) p[e] = resistances[e] / total;
  // Suffix masses keep the conditional probabilities accurate to the last edge.
  std::vector<double> suffix(m + 1, 0.0);
  for (Index e = m; e-- > 0;) suffix[e] = suffix[e + 1] + p[e];

  Sparsifier out;
  out.sigma = cfg.sigma;
  out.q = sample_count(g.n(), cfg.sigma, cfg.oversample_c);

  // Multinomial(q, p) as a chain of conditional binomials, driven by the counter-based stream so the
  // draw is reproducible across platforms.
  CounterRng rng(cfg.seed, streams::kSparsify);
  auto remaining = static_cast<long long>(out.q);
  std::vector<Edge> kept;
  for (Index e = 0; e < m && remaining > 0; ++e) {
    const double cond = e + 1 == m ? 1.0 : std::clamp(p[e] / suffix[e], 0.0, 1.0);
    boost::random::binomial_distribution<long long, double> draw(remaining, cond);
    const long long count = draw(rng);
    if (count == 0) continue;
    remaining -= count;
    kept.push_back(g.edges()[e]);
    out.weights.push_back(static_cast<double>(count) / (static_cast<double>(out.q) * p[e]));
  }
  out.support = Graph::from_edges(g.n(), std::move(kept), Construction::Sparsified, cfg.sigma);
  out.connected = out.support.is_connected();
  out.mean_degree = out.support.mean_degree();
  return out;
}

std::vector<double> sigma_grid(Index n, Index grid_size) {
  if (grid_size < 2) throw ParamError("sigma grid needs at least two points");
  if (n < 2) throw ParamError("sigma grid needs n >= 2");
  const double lo = std::log(1.0 / static_cast<double>(n));
  std::vector<double> grid(grid_size);
  for (Index i = 0; i < grid_size; ++i)
    grid[i] = std::exp(lo * (1.0 - static_cast<double>(i) / static_cast<double>(grid_size - 1)));
  grid.front() = 1.0 / static_cast<double>(n);
  grid.back() = 1.0;
  return grid;
}

void write_sparsifier_sidecar(const Sparsifier& s, const SparsifyConfig& cfg, const std::filesystem::path& path) {
  nlohmann::json j;
  j["sigma"] = s.sigma;
  j["q"] = s.q;
  j["support_size"] = s.support.edge_count();
  j["connected"] = s.connected;
  j["mean_degree"] = s.mean_degree;
  j["oversample_c"] = cfg.oversample_c;
  j["seed"] = cfg.seed;
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace geograph
