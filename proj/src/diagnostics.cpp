#include "geograph/diagnostics.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "geograph/error.hpp"
#include "geograph/io.hpp"
#include "geograph/rng.hpp"

namespace geograph {

namespace {

constexpr double kRatioSlack = 1e-12;

void check_ratio(double p_star) {
  if (!(p_star > 0.0 && p_star <= 1.0)) throw ParamError("PCA ratio must lie in (0, 1]");
}

double largest_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

}  // namespace

PcaSpectrum::PcaSpectrum(const Matrix& m) {
  if (m.rows() < 2) throw ParamError("PCA needs at least two rows");
  const Matrix centered = m.rowwise() - m.colwise().mean();
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU);
  const Vector power = svd.singularValues().array().square();
  const double total = power.sum();
  if (!(total > 0.0)) throw DegenerateError("matrix has zero variance after centering");
  u = svd.matrixU();
  cumulative.resize(power.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < power.size(); ++i) {
    acc += power(i);
    cumulative(i) = acc / total;
  }
}

Index PcaSpectrum::rank_for(double p_star) const {
  check_ratio(p_star);
  for (Eigen::Index i = 0; i < cumulative.size(); ++i)
    if (cumulative(i) >= p_star - kRatioSlack) return static_cast<Index>(i + 1);
  return static_cast<Index>(cumulative.size());
}

PcaBasis PcaSpectrum::basis(double p_star) const {
  const auto r = static_cast<Eigen::Index>(rank_for(p_star));
  return {u.leftCols(r), cumulative(r - 1), p_star};
}

PcaBasis pca_basis(const Matrix& m, double p_star) {
  check_ratio(p_star);
  return PcaSpectrum(m).basis(p_star);
}

double principal_cosine(const Matrix& qa, const Matrix& qb) {
  if (qa.rows() != qb.rows()) throw ShapeError("bases live in different dimensions");
  return largest_singular_value(qa.transpose() * qb);
}

double alignment(const Matrix& xa, const Matrix& y, double p_star) {
  const double grid[] = {p_star};
  return alignment_curve(xa, y, grid).front();
}

double alignment(const FeatureMatrix& x, const NormalizedAdjacency& a, const MembershipMatrix& y, double p_star) {
  return alignment(a.apply(x.values()), y.values(), p_star);
}

std::vector<double> alignment_curve(const Matrix& xa, const Matrix& y, std::span<const double> grid) {
  if (xa.rows() != y.rows()) throw ShapeError("alignment: row counts differ");
  const PcaSpectrum sa(xa);
  const PcaSpectrum sy(y);
  const Matrix cross = sa.u.transpose() * sy.u;
  std::vector<double> out;
  out.reserve(grid.size());
  for (double p : grid) {
    const auto ra = static_cast<Eigen::Index>(sa.rank_for(p));
    const auto ry = static_cast<Eigen::Index>(sy.rank_for(p));
    out.push_back(largest_singular_value(cross.topLeftCorner(ra, ry)));
  }
  return out;
}

std::vector<double> default_p_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

PStarSelection select_p_star(const Matrix& table, std::span<const double> accuracy, std::span<const double> grid) {
  if (static_cast<Index>(table.rows()) != accuracy.size() || static_cast<Index>(table.cols()) != grid.size())
    throw ShapeError("alignment table does not match the sweep and grid");
  if (grid.empty()) throw ParamError("empty ratio grid");
  const std::vector<double> acc(accuracy.begin(), accuracy.end());
  if (acc.size() < 3) throw CorrelationUndefined("p* selection needs at least three sweep points");
  if (std::all_of(acc.begin(), acc.end(), [&](double v) { return v == acc.front(); }))
    throw CorrelationUndefined("validation accuracy is constant across the sweep");

  PStarSelection sel;
  sel.correlations.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  Index best = grid.size();
  for (Index g = 0; g < grid.size(); ++g) {
    std::vector<double> column(acc.size());
    for (Index i = 0; i < acc.size(); ++i) column[i] = table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g));
    try {
      sel.correlations[g] = pearson(column, acc);
    } catch (const CorrelationUndefined&) {
      continue;
    }
    if (best == grid.size() || sel.correlations[g] > sel.correlations[best]) best = g;
  }
  if (best == grid.size()) throw CorrelationUndefined("alignment is constant at every ratio");
  sel.p_star = grid[best];
  sel.correlation = sel.correlations[best];
  for (Index i = 0; i < acc.size(); ++i) sel.alignments.push_back(table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best)));
  return sel;
}

PStarSelection select_p_star(std::span<const Graph> graphs, std::span<const double> accuracy,
                             const FeatureMatrix& x, const MembershipMatrix& y, std::span<const double> grid) {
  if (graphs.size() != accuracy.size()) throw ShapeError("one accuracy per graph expected");
  Matrix table(static_cast<Eigen::Index>(graphs.size()), static_cast<Eigen::Index>(grid.size()));
  const Matrix yv = y.values();
  for (Index i = 0; i < graphs.size(); ++i) {
    const auto curve = alignment_curve(normalize_adjacency(graphs[i]).apply(x.values()), yv, grid);
    for (Index g = 0; g < grid.size(); ++g) table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = curve[g];
  }
  return select_p_star(table, accuracy, grid);
}

namespace {

Matrix squared_distances(const Matrix& z) {
  const Eigen::Index n = z.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (z.row(i) - z.row(j)).squaredNorm();
  }
  return d;
}

// Fills column i of p with P(. | i) = exp(-beta d) normalized, beta chosen so its entropy is
// log(perplexity).
void bisect_row(const Matrix& d, Eigen::Index i, double log_perplexity, Matrix& p) {
  const Eigen::Index n = d.rows();
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j)
    if (j != i) dmin = std::min(dmin, d(j, i));
  double beta = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200; ++iter) {
    double sum = 0.0;
    double weighted = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) {
        p(j, i) = 0.0;
        continue;
      }
      const double shifted = d(j, i) - dmin;
      const double v = std::exp(-beta * shifted);
      p(j, i) = v;
      sum += v;
      weighted += v * shifted;
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    const double gap = entropy - log_perplexity;
    if (std::abs(gap) < 1e-9) break;
    if (gap > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  p.col(i) /= p.col(i).sum();
}

}  // namespace

Matrix tsne_conditional_p(const Matrix& z, double perplexity) {
  const Eigen::Index n = z.rows();
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n) / 3.0)
    throw ParamError("t-SNE perplexity must be positive and below N/3");
  const Matrix d = squared_distances(z);
  // Column i holds P(. | i) while bisecting so the inner loops run over contiguous memory.
  Matrix p(n, n);
  const double target = std::log(perplexity);
  for (Eigen::Index i = 0; i < n; ++i) bisect_row(d, i, target, p);
  return p.transpose();
}

Matrix tsne_joint_p(const Matrix& z, double perplexity) {
  const Matrix cond = tsne_conditional_p(z, perplexity);
  const double n = static_cast<double>(z.rows());
  Matrix p = (cond + cond.transpose()) / (2.0 * n);
  return p;
}

Embedding2D tsne_embed(const Matrix& z, const TsneConfig& cfg, std::uint64_t seed) {
  if (cfg.iterations < 0) throw ParamError("t-SNE iteration count must be nonnegative");
  const Eigen::Index n = z.rows();
  Matrix p = tsne_joint_p(z, cfg.perplexity);
  p = p.cwiseMax(1e-12);

  CounterRng rng(seed, streams::kTsne);
  RowMajorMatrix y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < 2; ++c) y(i, c) = 1e-2 * rng.normal();

  RowMajorMatrix velocity = RowMajorMatrix::Zero(n, 2);
  RowMajorMatrix gains = RowMajorMatrix::Ones(n, 2);
  RowMajorMatrix grad(n, 2);
  Matrix num(n, n);  // upper triangle used
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const double exaggeration = iter < cfg.exaggeration_iterations ? cfg.exaggeration : 1.0;
    const double momentum = iter < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;

    double sum_q = 0.0;
    for (Eigen::Index j = 1; j < n; ++j) {
      const double yj0 = y(j, 0), yj1 = y(j, 1);
      for (Eigen::Index i = 0; i < j; ++i) {
        const double dx = y(i, 0) - yj0, dy = y(i, 1) - yj1;
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = v;
        sum_q += v;
      }
    }
    sum_q *= 2.0;
    grad.setZero();
    for (Eigen::Index j = 1; j < n; ++j) {
      const double yj0 = y(j, 0), yj1 = y(j, 1);
      double gj0 = 0.0, gj1 = 0.0;
      for (Eigen::Index i = 0; i < j; ++i) {
        const double v = num(i, j);
        const double mult = 4.0 * (exaggeration * p(i, j) - v / sum_q) * v;
        const double fx = mult * (y(i, 0) - yj0), fy = mult * (y(i, 1) - yj1);
        grad(i, 0) += fx;
        grad(i, 1) += fy;
        gj0 -= fx;
        gj1 -= fy;
      }
      grad(j, 0) += gj0;
      grad(j, 1) += gj1;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0.0) == (velocity(i, c) > 0.0);
        gains(i, c) = std::max(same_sign ? gains(i, c) * 0.8 : gains(i, c) + 0.2, 0.01);
        velocity(i, c) = momentum * velocity(i, c) - cfg.learning_rate * gains(i, c) * grad(i, c);
        y(i, c) += velocity(i, c);
      }
    }
    const Eigen::RowVector2d mean = y.colwise().mean();
    y.rowwise() -= mean;
  }
  return {Matrix(y), seed, cfg.perplexity};
}

Embedding2D tsne_embed(const OutputActivations& z, double perplexity, std::uint64_t seed, int iterations) {
  TsneConfig cfg;
  cfg.perplexity = perplexity;
  cfg.iterations = iterations;
  return tsne_embed(z.z, cfg, seed);
}

ClassMasks class_masks(const MembershipMatrix& y) {
  const Matrix yv = y.values();
  const Matrix same = yv * yv.transpose();
  const auto n = same.rows();
  return {Matrix::Ones(n, n) - same, same - Matrix::Identity(n, n)};
}

double rcs(const Matrix& coords, const MembershipMatrix& y) {
  const Eigen::Index n = coords.rows();
  if (static_cast<Index>(n) != y.n_samples()) throw ShapeError("embedding and labels differ in size");
  const auto counts = y.class_counts();
  Index populated = 0;
  for (Index c : counts) {
    if (c == 1) throw ParamError("RCS needs at least two samples in every class");
    if (c >= 2) ++populated;
  }
  if (populated < 2) throw ParamError("RCS needs at least two classes");
  double inter = 0.0, intra = 0.0;
  double n_inter = 0.0, n_intra = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ci = y.label(static_cast<Index>(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (coords.row(i) - coords.row(j)).norm();
      if (ci == y.label(static_cast<Index>(j))) {
        intra += dist;
        n_intra += 1.0;
      } else {
        inter += dist;
        n_inter += 1.0;
      }
    }
  }
  const double intra_mean = intra / n_intra;
  if (!(intra_mean > 0.0)) throw DegenerateError("all class members coincide");
  return (inter / n_inter) / intra_mean;
}

double rcs(const Embedding2D& e, const MembershipMatrix& y) { return rcs(e.coords, y); }

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("pearson: lengths differ");
  if (a.size() < 3) throw CorrelationUndefined("pearson: fewer than three points");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(a) || constant(b)) throw CorrelationUndefined("pearson: constant input");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

void write_embedding_csv(const Embedding2D& e, const MembershipMatrix& y, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "x,y,class\n";
  for (Eigen::Index i = 0; i < e.coords.rows(); ++i)
    out << format_double(e.coords(i, 0)) << ',' << format_double(e.coords(i, 1)) << ',' << y.label(static_cast<Index>(i)) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace geograph
