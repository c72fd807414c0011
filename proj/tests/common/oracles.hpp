#pragma once

// Random instance generators and brute-force reference implementations shared by the unit tests
// and the acceptance property suite. Everything here is deliberately naive.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "geograph/diagnostics.hpp"
#include "geograph/gcn.hpp"
#include "geograph/graphs.hpp"
#include "geograph/rng.hpp"
#include "geograph/sparsify.hpp"

namespace oracle {

using geograph::CounterRng;
using geograph::Edge;
using geograph::Graph;
using geograph::Index;
using geograph::Matrix;

inline Matrix random_points(Index n, Index dim, CounterRng& rng) {
  Matrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = rng.uniform();
  return p;
}

inline Matrix random_normal(Index rows, Index cols, CounterRng& rng) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  return m;
}

/// Random spanning tree plus each remaining pair with probability p.
inline Graph random_connected_graph(Index n, double p, CounterRng& rng) {
  std::vector<Edge> edges;
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  geograph::shuffle(std::span<Index>(order), rng);
  for (Index i = 1; i < n; ++i) {
    const Index j = static_cast<Index>(rng.below(i));
    edges.push_back({static_cast<std::uint32_t>(order[i]), static_cast<std::uint32_t>(order[j])});
  }
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
  return Graph::from_edges(n, std::move(edges));
}

/// Minimum total weight over all n^(n-2) labeled spanning trees (Pruefer enumeration) and the
/// edge set attaining it.
inline std::pair<double, std::set<Edge>> brute_force_mst(const Matrix& w) {
  const auto n = static_cast<Index>(w.rows());
  std::vector<Index> seq(n - 2, 0);
  double best = std::numeric_limits<double>::infinity();
  std::set<Edge> best_edges;
  while (true) {
    std::vector<Index> degree(n, 1);
    for (Index s : seq) ++degree[s];
    std::set<Edge> edges;
    double total = 0.0;
    std::vector<Index> deg = degree;
    for (Index s : seq) {
      Index leaf = 0;
      while (deg[leaf] != 1) ++leaf;
      edges.insert({static_cast<std::uint32_t>(std::min(leaf, s)), static_cast<std::uint32_t>(std::max(leaf, s))});
      total += w(static_cast<Eigen::Index>(leaf), static_cast<Eigen::Index>(s));
      --deg[leaf];
      --deg[s];
    }
    Index a = n, b = n;
    for (Index i = 0; i < n; ++i)
      if (deg[i] == 1) (a == n ? a : b) = i;
    edges.insert({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
    total += w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    if (total < best) {
      best = total;
      best_edges = edges;
    }
    Index pos = 0;
    while (pos < seq.size() && ++seq[pos] == n) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return {best, best_edges};
}

/// d(i, i_k) by sorting row i (excluding i) directly.
inline double kth_distance(const Matrix& d, Index i, Index k) {
  std::vector<double> row;
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    if (static_cast<Index>(j) != i) row.push_back(d(static_cast<Eigen::Index>(i), j));
  std::sort(row.begin(), row.end());
  return row[k - 1];
}

enum class Rule { Knn, Mknn, Cknn };

/// Pre-union edge set straight from the defining inequalities.
inline std::set<Edge> rule_edges(const Matrix& d, Rule rule, Index k, double delta = 1.0) {
  const auto n = static_cast<Index>(d.rows());
  std::vector<double> kth(n);
  for (Index i = 0; i < n; ++i) kth[i] = kth_distance(d, i, k);
  std::set<Edge> out;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double dij = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      bool keep = false;
      switch (rule) {
        case Rule::Knn: keep = dij <= kth[i] || dij <= kth[j]; break;
        case Rule::Mknn: keep = dij <= kth[i] && dij <= kth[j]; break;
        case Rule::Cknn: keep = dij < delta * std::sqrt(kth[i] * kth[j]); break;
      }
      if (keep) out.insert({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  }
  return out;
}

inline std::set<Edge> edge_set(const Graph& g) { return {g.edges().begin(), g.edges().end()}; }

/// Moore-Penrose pseudoinverse of a symmetric matrix via its eigendecomposition.
inline Matrix symmetric_pinv(const Matrix& m, double tol = 1e-9) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Eigen::VectorXd inv = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = std::abs(inv(i)) > tol ? 1.0 / inv(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Norm-wise relative error between analytic and central-difference gradients of the training
/// loss. With a positive dropout rate every evaluation replays the same masks from `mask_seed`.
inline double gradient_relative_error(const geograph::GcnModel& model, const geograph::GcnInput& x,
                                      const geograph::NormalizedAdjacency& a, const geograph::MembershipMatrix& y,
                                      const std::vector<Index>& labeled, double l2, double dropout_rate = 0.0,
                                      std::uint64_t mask_seed = 0, double h = 1e-6) {
  using namespace geograph;
  auto run = [&](const GcnModel& m) {
    CounterRng masks(mask_seed, streams::kDropout);
    return forward(m, x, a, Dropout{dropout_rate, dropout_rate > 0.0 ? &masks : nullptr});
  };
  const auto pass = run(model);
  const Gradients g = backward(pass, model, a, y, labeled, l2);
  GcnModel probe = model;
  auto loss_at = [&]() { return loss(run(probe).out, y, labeled, probe.w0, l2); };
  double diff = 0.0, ref = 0.0;
  auto sweep = [&](Matrix& w, const Matrix& analytic) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double keep = w(i, j);
        w(i, j) = keep + h;
        const double up = loss_at();
        w(i, j) = keep - h;
        const double down = loss_at();
        w(i, j) = keep;
        const double fd = (up - down) / (2.0 * h);
        diff += (fd - analytic(i, j)) * (fd - analytic(i, j));
        ref += fd * fd;
      }
    }
  };
  sweep(probe.w0, g.w0);
  sweep(probe.w1, g.w1);
  return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-300);
}

/// D^{-1/2} (A + I) D^{-1/2} assembled entry by entry.
inline Matrix naive_normalized_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Matrix a = Matrix::Identity(n, n);
  for (const auto& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  const Eigen::VectorXd d = a.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) /= std::sqrt(d(i) * d(j));
  return a;
}

/// Mean pairwise distance over mask entries, as a plain double loop.
inline double masked_mean_distance(const Matrix& coords, const Matrix& mask) {
  double sum = 0.0, count = 0.0;
  for (Eigen::Index i = 0; i < coords.rows(); ++i)
    for (Eigen::Index j = 0; j < coords.rows(); ++j)
      if (mask(i, j) != 0.0) {
        sum += (coords.row(i) - coords.row(j)).norm();
        count += 1.0;
      }
  return sum / count;
}

/// Textbook Pearson formula from raw sums.
inline double pearson_raw_sums(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

}  // namespace oracle
