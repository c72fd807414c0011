#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "geograph/data.hpp"
#include "geograph/gcn.hpp"
#include "geograph/graphs.hpp"

namespace geograph {

/// Orthonormal basis of the leading principal directions (in sample space) of a matrix.
struct PcaBasis {
  Matrix components;  // N x r
  double explained_ratio = 0.0;  // cumulative variance ratio of the r kept components
  double p_star = 0.0;
};

/// Cumulative explained-variance ratios of the centered columns of `m`, one per singular value.
struct PcaSpectrum {
  Matrix u;  // left singular vectors, N x min(N, p)
  Vector cumulative;  // nondecreasing, last entry 1

  explicit PcaSpectrum(const Matrix& m);
  /// Smallest r whose cumulative ratio reaches p_star.
  Index rank_for(double p_star) const;
  PcaBasis basis(double p_star) const;
};

/// Centers the columns, takes the SVD and keeps the smallest number of left singular vectors whose
/// cumulative squared singular values reach `p_star` of the total. Throws ParamError for N < 2 or
/// p_star outside (0, 1], DegenerateError if the centered matrix is zero.
PcaBasis pca_basis(const Matrix& m, double p_star);

/// Cosine of the smallest principal angle between span(qa) and span(qb), both orthonormal.
double principal_cosine(const Matrix& qa, const Matrix& qb);

/// S(X, A, Y): principal cosine between the PCA bases of A X and Y at ratio p_star, in [0, 1].
double alignment(const FeatureMatrix& x, const NormalizedAdjacency& a, const MembershipMatrix& y, double p_star);
double alignment(const Matrix& xa, const Matrix& y, double p_star);

/// Alignment of one propagated feature matrix at every ratio of `grid` (one SVD each for A X and Y).
std::vector<double> alignment_curve(const Matrix& xa, const Matrix& y, std::span<const double> grid);

/// {0.1, 0.2, ..., 1.0}
std::vector<double> default_p_grid();

struct PStarSelection {
  double p_star = 0.0;
  double correlation = 0.0;
  std::vector<double> correlations;  // per grid ratio, NaN where alignment is constant
  std::vector<double> alignments;  // per sweep point, at p_star
};

/// Picks the ratio whose alignments correlate best with `accuracy`. `table` holds one row per sweep
/// point and one column per grid ratio. Ties go to the smaller ratio. Throws CorrelationUndefined
/// if the accuracies are constant, there are fewer than three points, or no ratio gives a defined
/// correlation.
PStarSelection select_p_star(const Matrix& table, std::span<const double> accuracy, std::span<const double> grid);
PStarSelection select_p_star(std::span<const Graph> graphs, std::span<const double> accuracy,
                             const FeatureMatrix& x, const MembershipMatrix& y, std::span<const double> grid);

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch = 250;
};

struct Embedding2D {
  Matrix coords;  // N x 2
  std::uint64_t seed = 0;
  double perplexity = 0.0;
};

/// Row-conditional Gaussian affinities P(j|i) of the rows of `z`, each row's bandwidth bisected so
/// its perplexity matches the target (entropy within 1e-5 nats).
Matrix tsne_conditional_p(const Matrix& z, double perplexity);
/// Symmetrized joint affinities (P + P^T) / 2N.
Matrix tsne_joint_p(const Matrix& z, double perplexity);

/// Exact t-SNE into two dimensions. Throws ParamError unless perplexity < N / 3.
Embedding2D tsne_embed(const Matrix& z, const TsneConfig& cfg, std::uint64_t seed);
Embedding2D tsne_embed(const OutputActivations& z, double perplexity, std::uint64_t seed, int iterations);

struct ClassMasks {
  Matrix inter;  // 11^T - YY^T
  Matrix intra;  // YY^T - I
};

ClassMasks class_masks(const MembershipMatrix& y);

/// Mean pairwise distance across classes over mean distance within classes. Throws ParamError
/// unless there are two classes with at least two samples each, DegenerateError when the
/// within-class mean is zero.
double rcs(const Embedding2D& e, const MembershipMatrix& y);
double rcs(const Matrix& coords, const MembershipMatrix& y);

/// Sample Pearson correlation. Throws ShapeError on a length mismatch and CorrelationUndefined for
/// fewer than three points or a constant input.
double pearson(std::span<const double> a, std::span<const double> b);

/// CSV x,y,class.
void write_embedding_csv(const Embedding2D& e, const MembershipMatrix& y, const std::filesystem::path& path);

}  // namespace geograph
