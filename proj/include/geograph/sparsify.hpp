#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "geograph/graphs.hpp"

namespace geograph {

/// Dense L = D - A of an unweighted graph.
Matrix laplacian(const Graph& g);

/// L = sum_e w_e (e_u - e_v)(e_u - e_v)^T for the listed edges.
Matrix weighted_laplacian(Index n, std::span<const Edge> edges, std::span<const double> weights);

/// R_e = (e_u - e_v)^T L^+ (e_u - e_v) for every edge of g, in g.edges() order. Uses the identity
/// L^+ = (L + J/N)^{-1} - J/N on connected graphs. Throws ConnectivityError when g is disconnected.
std::vector<double> effective_resistances(const Graph& g);

struct SparsifyConfig {
  double sigma = 0.5;
  double oversample_c = 0.25;
  std::uint64_t seed = 0;
};

struct Sparsifier {
  Graph support;  // unique sampled edges, unweighted
  std::vector<double> weights;  // count_e / (q p_e), aligned with support.edges()
  std::uint64_t q = 0;
  double sigma = 0.0;
  bool connected = false;
  double mean_degree = 0.0;
};

/// Number of samples ceil(c N ln N / sigma^2), saturating at 2^62.
std::uint64_t sample_count(Index n, double sigma, double oversample_c);

/// Spectral sparsification by effective-resistance sampling: q edges drawn with replacement with
/// probability proportional to R_e. Throws ConnectivityError on a disconnected graph and
/// ParamError unless sigma is in (0, 1] and the constant is positive.
Sparsifier sssa_sparsify(const Graph& g, const SparsifyConfig& cfg);
/// Same, with resistances from effective_resistances(g) (reused across a sigma sweep).
Sparsifier sssa_sparsify(const Graph& g, std::span<const double> resistances, const SparsifyConfig& cfg);

/// `grid_size` log-spaced values from 1/n to 1, ascending. Throws ParamError for grid_size < 2.
std::vector<double> sigma_grid(Index n, Index grid_size);

/// JSON sidecar {sigma, q, support_size, connected, mean_degree, oversample_c, seed}.
void write_sparsifier_sidecar(const Sparsifier& s, const SparsifyConfig& cfg, const std::filesystem::path& path);

}  // namespace geograph
