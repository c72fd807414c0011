#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geograph/geometry.hpp"

namespace geograph {

enum class Construction { Mst, Knn, Mknn, Cknn, Rmst, Sparsified, External };

/// Density-swept construction methods.
enum class Method { Knn, Mknn, Cknn, Rmst };

std::string to_string(Construction c);
std::string to_string(Method m);
/// Accepts knn, mknn, cknn, rmst (case-insensitive). Throws ParamError otherwise.
Method parse_method(std::string_view name);
Construction construction_of(Method m);

struct Edge {
  std::uint32_t u;
  std::uint32_t v;
  auto operator<=>(const Edge&) const = default;
};

/// Undirected simple graph; edges are kept sorted with u < v.
class Graph {
 public:
  Graph() = default;
  /// Empty graph on n nodes.
  explicit Graph(Index n, Construction tag = Construction::External, double param = 0.0)
      : n_(n), tag_(tag), param_(param) {}

  /// Normalizes orientation and removes duplicates. Throws ParamError on self-loops or
  /// out-of-range endpoints.
  static Graph from_edges(Index n, std::vector<Edge> edges, Construction tag = Construction::External,
                          double param = 0.0);

  Index n() const { return n_; }
  std::span<const Edge> edges() const { return edges_; }
  Index edge_count() const { return edges_.size(); }
  Construction construction() const { return tag_; }
  double parameter() const { return param_; }
  bool has_edge(Index u, Index v) const;
  std::vector<Index> degrees() const;
  std::vector<std::vector<std::uint32_t>> adjacency_lists() const;
  bool is_connected() const;
  double mean_degree() const;
  /// True when every edge of `other` is present here.
  bool contains(const Graph& other) const;

  bool operator==(const Graph& o) const { return n_ == o.n_ && edges_ == o.edges_; }

 private:
  Index n_ = 0;
  std::vector<Edge> edges_;
  Construction tag_ = Construction::External;
  double param_ = 0.0;
};

/// Union of the edge sets; the tag and parameter come from `a`.
Graph graph_union(const Graph& a, const Graph& b);

struct WeightedEdge {
  std::uint32_t u;
  std::uint32_t v;
  double w;
};

/// Kruskal spanning tree with weights kept. Equal weights are taken in lexicographic (u, v) order.
std::vector<WeightedEdge> kruskal_tree(const DistanceMatrix& d);

Graph minimum_spanning_tree(const DistanceMatrix& d);

/// Largest edge weight on the tree path between every pair; zero diagonal.
Matrix mst_path_max(Index n, std::span<const WeightedEdge> tree);

// The builders add the rule's edges to `backbone`. Pass the minimum spanning tree for the standard
// construction, or an empty Graph(n) to inspect the rule alone.

/// Edge iff d(i,j) <= d(i,i_k) or d(i,j) <= d(j,j_k).
Graph build_knn(const DistanceMatrix& d, const NeighborIndex& nbr, Index k, const Graph& backbone);
/// Edge iff d(i,j) <= d(i,i_k) and d(i,j) <= d(j,j_k).
Graph build_mknn(const DistanceMatrix& d, const NeighborIndex& nbr, Index k, const Graph& backbone);
/// Edge iff d(i,j) < delta * sqrt(d(i,i_k) d(j,j_k)).
Graph build_cknn(const DistanceMatrix& d, const NeighborIndex& nbr, Index k, double delta,
                 const Graph& backbone);
/// Edge iff d(i,j) < maxpath_MST(i,j) + gamma (d(i,i_k) + d(j,j_k)). The path maxima are taken over
/// the minimum spanning tree of `d`, independently of `backbone`.
Graph build_rmst(const DistanceMatrix& d, const NeighborIndex& nbr, double gamma, Index k_local,
                 const Graph& backbone);
/// Same rule with precomputed path maxima (reused across a gamma sweep).
Graph build_rmst(const DistanceMatrix& d, const NeighborIndex& nbr, const Matrix& path_max, double gamma,
                 Index k_local, const Graph& backbone);

/// |E| / (N(N-1)/2).
double edge_density(const Graph& g);

/// Parameter grid for a density sweep: geometric integers in [1, ceil(N/2)] for the k-based
/// methods, log-spaced reals in [1e-4, 10] for RMST. Strictly increasing; duplicates removed.
std::vector<double> density_grid(Method method, Index n, Index grid_size);

/// Everything a density sweep needs about one dataset, computed once.
struct GraphContext {
  DistanceMatrix distances;
  NeighborIndex neighbors;
  std::vector<WeightedEdge> tree;
  Graph mst;
  Matrix path_max;  // filled on first RMST use

  explicit GraphContext(DistanceMatrix d);
};

/// Builds the method's graph at `param` (k for kNN/MkNN/CkNN with delta = 1, gamma for RMST with
/// k = 1), unioned with the MST.
Graph build_graph(GraphContext& ctx, Method method, double param);

/// TSV edge list `u<TAB>v` with u < v.
void write_edge_list(const Graph& g, const std::filesystem::path& path);
/// Reads a TSV edge list. With n = 0 the node count is one more than the largest index.
Graph read_edge_list(const std::filesystem::path& path, Index n);

/// JSON sidecar {method, parameter, n, edge_count, density, mean_degree, connected}.
void write_graph_sidecar(const Graph& g, const std::filesystem::path& path);

}  // namespace geograph
