#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "geograph/data.hpp"

namespace geograph {

/// Dense symmetric matrix of pairwise Euclidean distances with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  /// Wraps an explicit matrix. Throws ParamError unless it is square, symmetric, nonnegative
  /// and has a zero diagonal.
  static DistanceMatrix from_values(Matrix values);

  Index n() const { return static_cast<Index>(values_.rows()); }
  double operator()(Index i, Index j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& values() const { return values_; }

 private:
  explicit DistanceMatrix(Matrix values) : values_(std::move(values)) {}
  friend DistanceMatrix distance_matrix(const Matrix& points);
  Matrix values_;
};

/// Euclidean distances between the rows of `points`. Each pair is evaluated once, so the result
/// is exactly symmetric. Throws ParamError for fewer than two rows.
DistanceMatrix distance_matrix(const Matrix& points);
DistanceMatrix distance_matrix(const FeatureMatrix& features);

/// Binary dump: little-endian uint64 N, then N*N float64 values row-major.
void save_distances(const DistanceMatrix& d, const std::filesystem::path& path);
DistanceMatrix load_distances(const std::filesystem::path& path);

/// For each node, every other node sorted by ascending distance (ties by node index).
class NeighborIndex {
 public:
  NeighborIndex() = default;
  explicit NeighborIndex(const DistanceMatrix& d);

  Index n() const { return n_; }
  /// Neighbors of i, nearest first; excludes i.
  std::span<const std::uint32_t> order(Index i) const {
    return {order_.data() + i * (n_ - 1), n_ - 1};
  }
  /// d(i, i_k) for k in [1, n-1].
  double kth_distance(Index i, Index k) const { return kth_[i * (n_ - 1) + (k - 1)]; }

 private:
  Index n_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<double> kth_;
};

inline NeighborIndex neighbor_index(const DistanceMatrix& d) { return NeighborIndex(d); }

}  // namespace geograph
