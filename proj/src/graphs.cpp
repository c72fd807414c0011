#include "geograph/graphs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "geograph/error.hpp"
#include "geograph/io.hpp"

namespace geograph {

std::string to_string(Construction c) {
  switch (c) {
    case Construction::Mst: return "mst";
    case Construction::Knn: return "knn";
    case Construction::Mknn: return "mknn";
    case Construction::Cknn: return "cknn";
    case Construction::Rmst: return "rmst";
    case Construction::Sparsified: return "sparsified";
    case Construction::External: return "external";
  }
  return "unknown";
}

std::string to_string(Method m) { return to_string(construction_of(m)); }

Construction construction_of(Method m) {
  switch (m) {
    case Method::Knn: return Construction::Knn;
    case Method::Mknn: return Construction::Mknn;
    case Method::Cknn: return Construction::Cknn;
    case Method::Rmst: return Construction::Rmst;
  }
  return Construction::External;
}

Method parse_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "knn") return Method::Knn;
  if (s == "mknn") return Method::Mknn;
  if (s == "cknn") return Method::Cknn;
  if (s == "rmst") return Method::Rmst;
  throw ParamError("unknown construction method '" + std::string(name) + "'");
}

Graph Graph::from_edges(Index n, std::vector<Edge> edges, Construction tag, double param) {
  for (auto& e : edges) {
    if (e.u == e.v) throw ParamError("self-loop at node " + std::to_string(e.u));
    if (e.u >= n || e.v >= n) throw ParamError("edge endpoint out of range");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  if (!std::is_sorted(edges.begin(), edges.end())) std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g(n, tag, param);
  g.edges_ = std::move(edges);
  return g;
}

bool Graph::has_edge(Index u, Index v) const {
  if (u > v) std::swap(u, v);
  const Edge e{static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)};
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

std::vector<Index> Graph::degrees() const {
  std::vector<Index> deg(n_, 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

std::vector<std::vector<std::uint32_t>> Graph::adjacency_lists() const {
  std::vector<std::vector<std::uint32_t>> adj(n_);
  for (const auto& e : edges_) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

bool Graph::is_connected() const {
  if (n_ <= 1) return true;
  std::vector<Index> parent(n_);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  Index components = n_;
  for (const auto& e : edges_) {
    const Index a = find(e.u);
    const Index b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

double Graph::mean_degree() const {
  return n_ == 0 ? 0.0 : 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(n_);
}

bool Graph::contains(const Graph& other) const {
  return std::includes(edges_.begin(), edges_.end(), other.edges_.begin(), other.edges_.end());
}

Graph graph_union(const Graph& a, const Graph& b) {
  if (a.n() != b.n()) throw ParamError("graph union requires equal node counts");
  std::vector<Edge> merged;
  merged.reserve(a.edge_count() + b.edge_count());
  std::set_union(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end(),
                 std::back_inserter(merged));
  return Graph::from_edges(a.n(), std::move(merged), a.construction(), a.parameter());
}

std::vector<WeightedEdge> kruskal_tree(const DistanceMatrix& d) {
  const Index n = d.n();
  if (n < 2) throw ParamError("spanning tree needs at least two nodes");
  std::vector<WeightedEdge> candidates;
  candidates.reserve(n * (n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      candidates.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), d(i, j)});
  std::sort(candidates.begin(), candidates.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });

  std::vector<Index> parent(n);
  std::vector<Index> rank(n, 0);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<WeightedEdge> tree;
  tree.reserve(n - 1);
  for (const auto& e : candidates) {
    Index a = find(e.u);
    Index b = find(e.v);
    if (a == b) continue;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
    tree.push_back(e);
    if (tree.size() == n - 1) break;
  }
  return tree;
}

namespace {

Graph tree_graph(Index n, std::span<const WeightedEdge> tree) {
  std::vector<Edge> edges;
  edges.reserve(tree.size());
  for (const auto& e : tree) edges.push_back({e.u, e.v});
  return Graph::from_edges(n, std::move(edges), Construction::Mst, 0.0);
}

void check_k(Index k, Index n) {
  if (k < 1 || k > n - 1) {
    throw ParamError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
  }
}

template <typename Rule>
Graph build_by_rule(Index n, Rule&& rule, const Graph& backbone, Construction tag, double param) {
  if (backbone.n() != n) throw ParamError("backbone node count does not match the distance matrix");
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rule(i, j)) edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  std::vector<Edge> merged;
  merged.reserve(edges.size() + backbone.edge_count());
  std::set_union(edges.begin(), edges.end(), backbone.edges().begin(), backbone.edges().end(),
                 std::back_inserter(merged));
  return Graph::from_edges(n, std::move(merged), tag, param);
}

}  // namespace

Graph minimum_spanning_tree(const DistanceMatrix& d) { return tree_graph(d.n(), kruskal_tree(d)); }

Matrix mst_path_max(Index n, std::span<const WeightedEdge> tree) {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(n);
  for (const auto& e : tree) {
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::uint32_t> stack;
  std::vector<char> visited(n);
  for (Index root = 0; root < n; ++root) {
    std::fill(visited.begin(), visited.end(), 0);
    visited[root] = 1;
    stack.assign(1, static_cast<std::uint32_t>(root));
    const auto r = static_cast<Eigen::Index>(root);
    while (!stack.empty()) {
      const std::uint32_t x = stack.back();
      stack.pop_back();
      for (const auto& [y, w] : adj[x]) {
        if (visited[y]) continue;
        visited[y] = 1;
        out(r, y) = std::max(out(r, x), w);
        stack.push_back(y);
      }
    }
  }
  return out;
}

Graph build_knn(const DistanceMatrix& d, const NeighborIndex& nbr, Index k, const Graph& backbone) {
  check_k(k, d.n());
  return build_by_rule(
      d.n(),
      [&](Index i, Index j) { return d(i, j) <= nbr.kth_distance(i, k) || d(i, j) <= nbr.kth_distance(j, k); },
      backbone, Construction::Knn, static_cast<double>(k));
}

Graph build_mknn(const DistanceMatrix& d, const NeighborIndex& nbr, Index k, const Graph& backbone) {
  check_k(k, d.n());
  return build_by_rule(
      d.n(),
      [&](Index i, Index j) { return d(i, j) <= nbr.kth_distance(i, k) && d(i, j) <= nbr.kth_distance(j, k); },
      backbone, Construction::Mknn, static_cast<double>(k));
}

Graph build_cknn(const DistanceMatrix& d, const NeighborIndex& nbr, Index k, double delta,
                 const Graph& backbone) {
  check_k(k, d.n());
  if (!(delta > 0.0)) throw ParamError("CkNN delta must be positive");
  return build_by_rule(
      d.n(),
      [&](Index i, Index j) {
        return d(i, j) < delta * std::sqrt(nbr.kth_distance(i, k) * nbr.kth_distance(j, k));
      },
      backbone, Construction::Cknn, static_cast<double>(k));
}

Graph build_rmst(const DistanceMatrix& d, const NeighborIndex& nbr, const Matrix& path_max, double gamma,
                 Index k_local, const Graph& backbone) {
  if (!(gamma >= 0.0)) throw ParamError("RMST gamma must be nonnegative");
  check_k(k_local, d.n());
  return build_by_rule(
      d.n(),
      [&](Index i, Index j) {
        const double local = nbr.kth_distance(i, k_local) + nbr.kth_distance(j, k_local);
        return d(i, j) < path_max(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + gamma * local;
      },
      backbone, Construction::Rmst, gamma);
}

Graph build_rmst(const DistanceMatrix& d, const NeighborIndex& nbr, double gamma, Index k_local,
                 const Graph& backbone) {
  const auto tree = kruskal_tree(d);
  return build_rmst(d, nbr, mst_path_max(d.n(), tree), gamma, k_local, backbone);
}

double edge_density(const Graph& g) {
  if (g.n() < 2) throw ParamError("edge density needs at least two nodes");
  const double n = static_cast<double>(g.n());
  return static_cast<double>(g.edge_count()) / (n * (n - 1.0) / 2.0);
}

std::vector<double> density_grid(Method method, Index n, Index grid_size) {
  if (grid_size < 2 || grid_size > 50) throw ParamError("grid size must lie in [2, 50]");
  std::vector<double> grid;
  const double steps = static_cast<double>(grid_size - 1);
  if (method == Method::Rmst) {
    for (Index i = 0; i < grid_size; ++i) {
      grid.push_back(std::pow(10.0, -4.0 + 5.0 * static_cast<double>(i) / steps));
    }
    grid.back() = 10.0;
    return grid;
  }
  const double k_max = std::ceil(static_cast<double>(n) / 2.0);
  for (Index i = 0; i < grid_size; ++i) {
    const double k = std::round(std::exp(std::log(k_max) * static_cast<double>(i) / steps));
    if (grid.empty() || k > grid.back()) grid.push_back(std::max(1.0, k));
  }
  return grid;
}

GraphContext::GraphContext(DistanceMatrix d)
    : distances(std::move(d)), neighbors(distances), tree(kruskal_tree(distances)) {
  std::vector<Edge> edges;
  for (const auto& e : tree) edges.push_back({e.u, e.v});
  mst = Graph::from_edges(distances.n(), std::move(edges), Construction::Mst, 0.0);
}

Graph build_graph(GraphContext& ctx, Method method, double param) {
  const auto& d = ctx.distances;
  switch (method) {
    case Method::Knn: return build_knn(d, ctx.neighbors, static_cast<Index>(param), ctx.mst);
    case Method::Mknn: return build_mknn(d, ctx.neighbors, static_cast<Index>(param), ctx.mst);
    case Method::Cknn: return build_cknn(d, ctx.neighbors, static_cast<Index>(param), 1.0, ctx.mst);
    case Method::Rmst:
      if (ctx.path_max.size() == 0) ctx.path_max = mst_path_max(d.n(), ctx.tree);
      return build_rmst(d, ctx.neighbors, ctx.path_max, param, 1, ctx.mst);
  }
  throw ParamError("unknown method");
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& e : g.edges()) out << e.u << '\t' << e.v << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Graph read_edge_list(const std::filesystem::path& path, Index n) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    long long u = -1;
    long long v = -1;
    std::string extra;
    if (!(fields >> u >> v) || (fields >> extra) || u < 0 || v < 0 ||
        (n != 0 && (static_cast<Index>(u) >= n || static_cast<Index>(v) >= n)) || u == v) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": invalid edge '" + line + "'");
    }
    edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
  }
  if (n == 0) {
    for (const auto& e : edges) n = std::max<Index>(n, std::max(e.u, e.v) + 1);
    if (n == 0) throw FormatError(path.string() + ": empty edge list and no node count given");
  }
  return Graph::from_edges(n, std::move(edges), Construction::External, 0.0);
}

void write_graph_sidecar(const Graph& g, const std::filesystem::path& path) {
  nlohmann::json j;
  j["method"] = to_string(g.construction());
  j["parameter"] = g.parameter();
  j["n"] = g.n();
  j["edge_count"] = g.edge_count();
  j["density"] = edge_density(g);
  j["mean_degree"] = g.mean_degree();
  j["connected"] = g.is_connected();
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace geograph
