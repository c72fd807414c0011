#pragma once

#include <Eigen/Sparse>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "geograph/data.hpp"
#include "geograph/geometry.hpp"
#include "geograph/graphs.hpp"
#include "geograph/rng.hpp"

namespace geograph {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// D^{-1/2} (A + I) D^{-1/2} with D_ii = 1 + deg(i).
///
/// Held as the diagonal scaling plus the 0-1 pattern of A + I. Graphs denser than one half are
/// stored through their complement instead, using (A + I) V = 1 1^T V - A' V with A' the
/// complement adjacency, so products cost O(min(|E|, N^2 - |E|)) per column either way.
class NormalizedAdjacency {
 public:
  NormalizedAdjacency() = default;

  static NormalizedAdjacency from_graph(const Graph& g);
  /// The no-graph operator (identity): a GCN with it is a plain two-layer perceptron.
  static NormalizedAdjacency identity(Index n);

  Index n() const { return n_; }
  bool is_identity() const { return identity_; }
  /// Returns A_hat * m.
  Matrix apply(const Matrix& m) const;
  Matrix dense() const;

 private:
  Index n_ = 0;
  bool identity_ = true;
  bool complement_ = false;
  Vector scale_;
  SparseRowMatrix pattern_;
};

inline NormalizedAdjacency normalize_adjacency(const Graph& g) { return NormalizedAdjacency::from_graph(g); }
inline NormalizedAdjacency no_graph(Index n) { return NormalizedAdjacency::identity(n); }

/// Feature matrix for training. Dropout acts on nonzero entries only, which is equivalent to
/// dense dropout since dropped zeros stay zero. Inputs with at least a quarter nonzero entries are
/// also kept dense so products go through dense kernels; both forms draw the same masks.
struct GcnInput {
  SparseRowMatrix x;
  RowMajorMatrix dense;

  bool is_dense() const { return dense.size() != 0; }

  GcnInput() = default;
  explicit GcnInput(const FeatureMatrix& features);
  explicit GcnInput(const Matrix& dense);
  Index n() const { return static_cast<Index>(x.rows()); }
  Index n_features() const { return static_cast<Index>(x.cols()); }
};

struct TrainConfig {
  int epochs = 2000;
  double learning_rate = 0.01;
  double dropout = 0.5;
  double l2 = 5e-4;
  int early_stop_window = 200;
  int hidden = 16;
  std::uint64_t seed = 0;
};

/// Throws ParamError for out-of-domain values.
void validate(const TrainConfig& cfg);

struct AdamState {
  Matrix m0, v0, m1, v1;
  long step = 0;
};

struct GcnModel {
  Matrix w0;  // F x H
  Matrix w1;  // H x C
  AdamState adam;
  CounterRng rng;  // dropout stream

  Index hidden() const { return static_cast<Index>(w0.cols()); }
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)); zeroed optimizer state.
GcnModel init_model(Index n_features, Index hidden, Index n_classes, std::uint64_t seed);

struct OutputActivations {
  Matrix z;  // N x C, rows sum to one
};

struct Dropout {
  double rate = 0.0;
  CounterRng* rng = nullptr;
  bool active() const { return rng != nullptr && rate > 0.0; }
};

/// Intermediates kept by forward() for backward().
struct ForwardPass {
  OutputActivations out;
  SparseRowMatrix x_dropped;  // sparse inputs
  RowMajorMatrix x_dropped_dense;  // dense inputs
  Matrix hidden_pre;  // A X W0
  Matrix hidden_dropped;  // dropout(ReLU(hidden_pre))
  Matrix hidden_scale;  // dropout multipliers on the hidden layer (0 or 1/keep)
};

/// Z = softmax(A relu(A X W0) W1), with inverted dropout on X and on the hidden layer when
/// `dropout` is active. Throws ShapeError on inconsistent shapes.
ForwardPass forward(const GcnModel& model, const GcnInput& x, const NormalizedAdjacency& a,
                    Dropout dropout = {});

inline constexpr double kLogClamp = 1e-12;

/// -sum_{l in labeled} ln Z[l, y_l] + l2/2 ||W0||_F^2. Probabilities below 1e-12 are clamped.
double loss(const OutputActivations& z, const MembershipMatrix& y, std::span<const Index> labeled,
            const Matrix& w0, double l2);

struct Gradients {
  Matrix w0;
  Matrix w1;
};

/// Exact gradients of loss() for the dropout masks recorded in `pass`.
Gradients backward(const ForwardPass& pass, const GcnModel& model, const NormalizedAdjacency& a,
                   const MembershipMatrix& y, std::span<const Index> labeled, double l2);

void adam_step(GcnModel& model, const Gradients& grads, double learning_rate);

struct EpochRecord {
  int epoch;
  double train_loss;
  double val_loss;
  double val_acc;
};

struct TrainResult {
  GcnModel model;  // weights of the best-validation-loss epoch
  OutputActivations output;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

/// Full-batch Adam training with early stopping on validation loss: halts once the loss has not
/// improved for `early_stop_window` epochs and restores the best epoch's weights.
/// Throws TrainingError when the loss becomes non-finite.
TrainResult train(const Dataset& dataset, const NormalizedAdjacency& a, const TrainConfig& cfg);
TrainResult train(const GcnInput& x, const MembershipMatrix& y, const Split& split,
                  const NormalizedAdjacency& a, const TrainConfig& cfg);

/// Argmax per row, ties to the lowest class index.
std::vector<int> predict(const OutputActivations& z);

/// Fraction of `subset` whose argmax prediction matches the label. Throws ParamError if empty.
double accuracy(const OutputActivations& z, const MembershipMatrix& y, std::span<const Index> subset);
double accuracy(std::span<const int> predictions, const MembershipMatrix& y, std::span<const Index> subset);

/// Plurality vote of the k nearest training samples (distance ties by index, vote ties to the
/// smallest class). Entries for training samples are -1.
std::vector<int> knnc_classify(const DistanceMatrix& d, const MembershipMatrix& labels, const Split& split,
                               Index k);

/// Shape header (uint64 F, H, C) then row-major float64 W0 and W1.
void write_checkpoint(const GcnModel& model, const std::filesystem::path& path);
std::pair<Matrix, Matrix> read_checkpoint(const std::filesystem::path& path);

/// CSV: epoch,train_loss,val_loss,val_acc
void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path);

}  // namespace geograph
