#include "geograph/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "geograph/error.hpp"

namespace geograph {

DistanceMatrix DistanceMatrix::from_values(Matrix values) {
  if (values.rows() != values.cols()) throw ParamError("distance matrix must be square");
  if (values.rows() < 2) throw ParamError("distance matrix needs at least two points");
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    if (values(i, i) != 0.0) throw ParamError("distance matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < i; ++j) {
      if (values(i, j) != values(j, i)) throw ParamError("distance matrix must be symmetric");
      if (!(values(i, j) >= 0.0) || !std::isfinite(values(i, j))) {
        throw ParamError("distances must be finite and nonnegative");
      }
    }
  }
  return DistanceMatrix(std::move(values));
}

DistanceMatrix distance_matrix(const Matrix& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw ParamError("distance matrix needs at least two samples");
  // Row-major copy so each pair reads contiguous memory.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = points;
  const Eigen::Index f = rows.cols();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = rows.data() + i * f;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double* xj = rows.data() + j * f;
      double s = 0.0;
      for (Eigen::Index k = 0; k < f; ++k) {
        const double diff = xi[k] - xj[k];
        s += diff * diff;
      }
      const double dist = std::sqrt(s);
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return DistanceMatrix(std::move(d));
}

DistanceMatrix distance_matrix(const FeatureMatrix& features) {
  return distance_matrix(features.values());
}

namespace {

template <typename T>
void write_le(std::ofstream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void save_distances(const DistanceMatrix& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_le<std::uint64_t>(out, d.n());
  for (Index i = 0; i < d.n(); ++i)
    for (Index j = 0; j < d.n(); ++j) write_le<double>(out, d(i, j));
  if (!out) throw IoError("write failed for " + path.string());
}

DistanceMatrix load_distances(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto n = static_cast<Eigen::Index>(read_le<std::uint64_t>(in));
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = read_le<double>(in);
  if (!in) throw FormatError(path.string() + ": truncated distance file");
  return DistanceMatrix::from_values(std::move(m));
}

NeighborIndex::NeighborIndex(const DistanceMatrix& d) : n_(d.n()) {
  const Index m = n_ - 1;
  order_.resize(n_ * m);
  kth_.resize(n_ * m);
  std::vector<std::uint32_t> buf(n_);
  for (Index i = 0; i < n_; ++i) {
    std::iota(buf.begin(), buf.end(), 0u);
    buf.erase(buf.begin() + static_cast<std::ptrdiff_t>(i));
    std::sort(buf.begin(), buf.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double da = d(i, a);
      const double db = d(i, b);
      return da < db || (da == db && a < b);
    });
    std::copy(buf.begin(), buf.end(), order_.begin() + static_cast<std::ptrdiff_t>(i * m));
    for (Index k = 0; k < m; ++k) kth_[i * m + k] = d(i, buf[k]);
    buf.resize(n_);
  }
}

}  // namespace geograph
