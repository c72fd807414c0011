#include "geograph/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "geograph/error.hpp"

namespace geograph {

namespace {

// s * m and s^T * m for a row-major sparse s. Eigen's generic kernels walk the column-major
// right-hand side with a stride, which dominates training time for narrow m.
Matrix csr_product(const SparseRowMatrix& s, const Matrix& m) {
  const RowMajorMatrix rhs = m;
  RowMajorMatrix out = RowMajorMatrix::Zero(s.rows(), m.cols());
  const auto w = m.cols();
  const int* outer = s.outerIndexPtr();
  const int* inner = s.innerIndexPtr();
  const double* val = s.valuePtr();
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double* __restrict dst = out.data() + i * w;
    for (int k = outer[i]; k < outer[i + 1]; ++k) {
      const double v = val[k];
      const double* __restrict src = rhs.data() + static_cast<Eigen::Index>(inner[k]) * w;
      for (Eigen::Index c = 0; c < w; ++c) dst[c] += v * src[c];
    }
  }
  return out;
}

Matrix csr_transpose_product(const SparseRowMatrix& s, const Matrix& m) {
  const RowMajorMatrix rhs = m;
  RowMajorMatrix out = RowMajorMatrix::Zero(s.cols(), m.cols());
  const auto w = m.cols();
  const int* outer = s.outerIndexPtr();
  const int* inner = s.innerIndexPtr();
  const double* val = s.valuePtr();
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double* src = rhs.data() + i * w;
    for (int k = outer[i]; k < outer[i + 1]; ++k) {
      const double v = val[k];
      double* dst = out.data() + static_cast<Eigen::Index>(inner[k]) * w;
      for (Eigen::Index c = 0; c < w; ++c) dst[c] += v * src[c];
    }
  }
  return out;
}

// Inverted-dropout multiplier: 1/keep when uniform() < keep, else 0. Works on the raw 53-bit draw
// with an arithmetic mask; a data-dependent branch here mispredicts half the time.
class KeepMask {
 public:
  KeepMask(double keep, CounterRng& rng)
      : threshold_(static_cast<std::uint64_t>(std::ceil(std::ldexp(keep, 53)))), inv_keep_(1.0 / keep), rng_(rng) {}

  double next() {
    const std::uint64_t bits = rng_() >> 11;
    return static_cast<double>((bits - threshold_) >> 63) * inv_keep_;
  }

 private:
  std::uint64_t threshold_;
  double inv_keep_;
  CounterRng& rng_;
};

}  // namespace

NormalizedAdjacency NormalizedAdjacency::identity(Index n) {
  NormalizedAdjacency a;
  a.n_ = n;
  a.identity_ = true;
  return a;
}

NormalizedAdjacency NormalizedAdjacency::from_graph(const Graph& g) {
  NormalizedAdjacency a;
  a.n_ = g.n();
  a.identity_ = false;
  const auto n = static_cast<Eigen::Index>(g.n());
  const auto deg = g.degrees();
  a.scale_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) a.scale_(i) = 1.0 / std::sqrt(1.0 + static_cast<double>(deg[static_cast<Index>(i)]));

  // Entries of A + I versus entries of its complement (off-diagonal non-edges).
  const double with_self = static_cast<double>(g.n()) + 2.0 * static_cast<double>(g.edge_count());
  const double total = static_cast<double>(g.n()) * static_cast<double>(g.n());
  a.complement_ = with_self > total / 2.0;

  std::vector<Eigen::Triplet<double>> triplets;
  if (!a.complement_) {
    triplets.reserve(static_cast<std::size_t>(with_self));
    for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);
    for (const auto& e : g.edges()) {
      triplets.emplace_back(e.u, e.v, 1.0);
      triplets.emplace_back(e.v, e.u, 1.0);
    }
  } else {
    triplets.reserve(static_cast<std::size_t>(total - with_self));
    const auto adj = g.adjacency_lists();
    std::vector<char> linked(g.n(), 0);
    for (Index i = 0; i < g.n(); ++i) {
      for (auto j : adj[i]) linked[j] = 1;
      linked[i] = 1;
      for (Index j = 0; j < g.n(); ++j)
        if (!linked[j]) triplets.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), 1.0);
      for (auto j : adj[i]) linked[j] = 0;
      linked[i] = 0;
    }
  }
  a.pattern_.resize(n, n);
  a.pattern_.setFromTriplets(triplets.begin(), triplets.end());
  a.pattern_.makeCompressed();
  return a;
}

Matrix NormalizedAdjacency::apply(const Matrix& m) const {
  if (static_cast<Index>(m.rows()) != n_) throw ShapeError("adjacency product: row count mismatch");
  if (identity_) return m;
  const Matrix scaled = scale_.asDiagonal() * m;
  Matrix out = csr_product(pattern_, scaled);
  if (complement_) {
    const Eigen::RowVectorXd col_sums = scaled.colwise().sum();
    out = (-out).rowwise() + col_sums;
  }
  return scale_.asDiagonal() * out;
}

Matrix NormalizedAdjacency::dense() const {
  return apply(Matrix::Identity(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_)));
}

GcnInput::GcnInput(const Matrix& values) {
  x = values.sparseView();
  x.makeCompressed();
  if (4 * static_cast<double>(x.nonZeros()) >= static_cast<double>(values.size())) dense = values;
}

GcnInput::GcnInput(const FeatureMatrix& features) : GcnInput(features.values()) {}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs <= 0) throw ParamError("epochs must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ParamError("learning rate must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ParamError("dropout must lie in [0, 1)");
  if (!(cfg.l2 >= 0.0)) throw ParamError("l2 coefficient must be nonnegative");
  if (cfg.early_stop_window <= 0) throw ParamError("early stopping window must be positive");
  if (cfg.hidden <= 0) throw ParamError("hidden width must be positive");
}

GcnModel init_model(Index n_features, Index hidden, Index n_classes, std::uint64_t seed) {
  CounterRng rng(seed, streams::kInit);
  auto glorot = [&](Index rows, Index cols) {
    const double range = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = (2.0 * rng.uniform() - 1.0) * range;
    return w;
  };
  GcnModel model;
  model.w0 = glorot(n_features, hidden);
  model.w1 = glorot(hidden, n_classes);
  model.adam.m0 = Matrix::Zero(model.w0.rows(), model.w0.cols());
  model.adam.v0 = model.adam.m0;
  model.adam.m1 = Matrix::Zero(model.w1.rows(), model.w1.cols());
  model.adam.v1 = model.adam.m1;
  model.rng = CounterRng(seed, streams::kDropout);
  return model;
}

namespace {

void softmax_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = std::exp(m(i, j) - mx);
      sum += m(i, j);
    }
    m.row(i) /= sum;
  }
}

}  // namespace

ForwardPass forward(const GcnModel& model, const GcnInput& x, const NormalizedAdjacency& a, Dropout dropout) {
  if (x.n_features() != static_cast<Index>(model.w0.rows())) throw ShapeError("feature count does not match W0");
  if (model.w0.cols() != model.w1.rows()) throw ShapeError("W0 and W1 hidden widths differ");
  if (a.n() != x.n()) throw ShapeError("adjacency size does not match sample count");

  ForwardPass pass;
  const bool drop = dropout.active();
  CounterRng idle;
  KeepMask mask(drop ? 1.0 - dropout.rate : 1.0, drop ? *dropout.rng : idle);
  if (x.is_dense()) {
    pass.x_dropped_dense = x.dense;
    RowMajorMatrix& xd = pass.x_dropped_dense;
    if (drop) {
      // Walk the sparse structure so both forms consume the stream identically.
      const int* outer = x.x.outerIndexPtr();
      const int* inner = x.x.innerIndexPtr();
      for (Eigen::Index i = 0; i < xd.rows(); ++i)
        for (int k = outer[i]; k < outer[i + 1]; ++k)
          xd(i, inner[k]) *= mask.next();
    }
    pass.hidden_pre = a.apply(xd * model.w0);
  } else {
    pass.x_dropped = x.x;
    if (drop) {
      double* values = pass.x_dropped.valuePtr();
      for (Eigen::Index k = 0; k < pass.x_dropped.nonZeros(); ++k) {
        values[k] *= mask.next();
      }
    }
    pass.hidden_pre = a.apply(csr_product(pass.x_dropped, model.w0));
  }
  pass.hidden_dropped = pass.hidden_pre.cwiseMax(0.0);
  if (drop) {
    pass.hidden_scale.resize(pass.hidden_pre.rows(), pass.hidden_pre.cols());
    for (Eigen::Index j = 0; j < pass.hidden_scale.cols(); ++j)
      for (Eigen::Index i = 0; i < pass.hidden_scale.rows(); ++i)
        pass.hidden_scale(i, j) = mask.next();
    pass.hidden_dropped.array() *= pass.hidden_scale.array();
  }
  pass.out.z = a.apply(pass.hidden_dropped * model.w1);
  softmax_rows(pass.out.z);
  return pass;
}

double loss(const OutputActivations& z, const MembershipMatrix& y, std::span<const Index> labeled,
            const Matrix& w0, double l2) {
  double total = 0.0;
  for (Index l : labeled) {
    const double p = z.z(static_cast<Eigen::Index>(l), y.label(l));
    total -= std::log(std::max(p, kLogClamp));
  }
  return total + 0.5 * l2 * w0.squaredNorm();
}

Gradients backward(const ForwardPass& pass, const GcnModel& model, const NormalizedAdjacency& a,
                   const MembershipMatrix& y, std::span<const Index> labeled, double l2) {
  const Matrix& z = pass.out.z;
  Matrix d_out = Matrix::Zero(z.rows(), z.cols());
  for (Index l : labeled) {
    const auto r = static_cast<Eigen::Index>(l);
    d_out.row(r) = z.row(r);
    d_out(r, y.label(l)) -= 1.0;
  }
  const Matrix d_p1 = a.apply(d_out);
  Gradients g;
  g.w1 = pass.hidden_dropped.transpose() * d_p1;
  Matrix d_hidden = d_p1 * model.w1.transpose();
  if (pass.hidden_scale.size() != 0) d_hidden.array() *= pass.hidden_scale.array();
  d_hidden.array() *= (pass.hidden_pre.array() > 0.0).cast<double>();
  const Matrix d_p0 = a.apply(d_hidden);
  if (pass.x_dropped_dense.size() != 0) g.w0 = pass.x_dropped_dense.transpose() * d_p0;
  else g.w0 = csr_transpose_product(pass.x_dropped, d_p0);
  if (l2 != 0.0) g.w0 += l2 * model.w0;
  return g;
}

void adam_step(GcnModel& model, const Gradients& grads, double learning_rate) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  auto& s = model.adam;
  ++s.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(s.step));
  auto update = [&](Matrix& w, Matrix& m, Matrix& v, const Matrix& g) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    w.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  update(model.w0, s.m0, s.v0, grads.w0);
  update(model.w1, s.m1, s.v1, grads.w1);
}

std::vector<int> predict(const OutputActivations& z) {
  std::vector<int> out(static_cast<std::size_t>(z.z.rows()));
  for (Eigen::Index i = 0; i < z.z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < z.z.cols(); ++c)
      if (z.z(i, c) > z.z(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double accuracy(std::span<const int> predictions, const MembershipMatrix& y, std::span<const Index> subset) {
  if (subset.empty()) throw ParamError("accuracy over an empty subset");
  std::size_t hits = 0;
  for (Index i : subset) hits += predictions[i] == y.label(i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(subset.size());
}

double accuracy(const OutputActivations& z, const MembershipMatrix& y, std::span<const Index> subset) {
  const auto p = predict(z);
  return accuracy(p, y, subset);
}

TrainResult train(const GcnInput& x, const MembershipMatrix& y, const Split& split,
                  const NormalizedAdjacency& a, const TrainConfig& cfg) {
  validate(cfg);
  if (y.n_samples() != x.n()) throw ShapeError("label count does not match sample count");
  TrainResult result;
  GcnModel model = init_model(x.n_features(), static_cast<Index>(cfg.hidden),
                              static_cast<Index>(y.n_classes()), cfg.seed);
  Matrix best_w0 = model.w0;
  Matrix best_w1 = model.w1;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const bool has_validation = !split.validation.empty();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto pass = forward(model, x, a, Dropout{cfg.dropout, &model.rng});
    const double train_loss = loss(pass.out, y, split.train, model.w0, cfg.l2);
    if (!std::isfinite(train_loss)) {
      throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch), epoch);
    }
    adam_step(model, backward(pass, model, a, y, split.train, cfg.l2), cfg.learning_rate);

    const auto eval = forward(model, x, a);
    const double val_loss = has_validation ? loss(eval.out, y, split.validation, model.w0, cfg.l2) : 0.0;
    const double val_acc = has_validation ? accuracy(eval.out, y, split.validation) : 0.0;
    if (!std::isfinite(val_loss)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch), epoch);
    }
    result.history.push_back({epoch, train_loss, val_loss, val_acc});

    if (!has_validation) {
      best_w0 = model.w0;
      best_w1 = model.w1;
      result.best_epoch = epoch;
      continue;
    }
    if (val_loss < best_val) {
      best_val = val_loss;
      best_w0 = model.w0;
      best_w1 = model.w1;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_window) {
      break;
    }
  }
  model.w0 = std::move(best_w0);
  model.w1 = std::move(best_w1);
  result.output = forward(model, x, a).out;
  result.model = std::move(model);
  return result;
}

TrainResult train(const Dataset& dataset, const NormalizedAdjacency& a, const TrainConfig& cfg) {
  return train(GcnInput(dataset.features), dataset.labels, dataset.split, a, cfg);
}

std::vector<int> knnc_classify(const DistanceMatrix& d, const MembershipMatrix& labels, const Split& split,
                               Index k) {
  if (k < 1 || k > split.train.size()) throw ParamError("kNNC k must lie in [1, |train|]");
  const Index n = d.n();
  std::vector<int> out(n, -1);
  std::vector<char> is_train(n, 0);
  for (Index t : split.train) is_train[t] = 1;
  std::vector<Index> candidates(split.train.begin(), split.train.end());
  std::vector<int> votes(static_cast<std::size_t>(labels.n_classes()));
  for (Index i = 0; i < n; ++i) {
    if (is_train[i]) continue;
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                      [&](Index a, Index b) { return d(i, a) < d(i, b) || (d(i, a) == d(i, b) && a < b); });
    std::fill(votes.begin(), votes.end(), 0);
    for (Index r = 0; r < k; ++r) ++votes[static_cast<std::size_t>(labels.label(candidates[r]))];
    out[i] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

namespace {

void write_u64(std::ofstream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void write_row_major(std::ofstream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

Matrix read_row_major(std::ifstream& in, std::uint64_t rows, std::uint64_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) in.read(reinterpret_cast<char*>(&m(i, j)), sizeof(double));
  return m;
}

}  // namespace

void write_checkpoint(const GcnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_u64(out, static_cast<std::uint64_t>(model.w0.rows()));
  write_u64(out, static_cast<std::uint64_t>(model.w0.cols()));
  write_u64(out, static_cast<std::uint64_t>(model.w1.cols()));
  write_row_major(out, model.w0);
  write_row_major(out, model.w1);
  if (!out) throw IoError("write failed for " + path.string());
}

std::pair<Matrix, Matrix> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto f = read_u64(in);
  const auto h = read_u64(in);
  const auto c = read_u64(in);
  if (!in || f == 0 || h == 0 || c == 0 || f > (1u << 24) || h > (1u << 16) || c > (1u << 16)) {
    throw FormatError(path.string() + ": bad checkpoint header");
  }
  auto w0 = read_row_major(in, f, h);
  auto w1 = read_row_major(in, h, c);
  if (!in) throw FormatError(path.string() + ": truncated checkpoint");
  return {std::move(w0), std::move(w1)};
}

void write_history_csv(std::span<const EpochRecord> history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "epoch,train_loss,val_loss,val_acc\n";
  for (const auto& r : history) out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.val_acc << '\n';
}

}  // namespace geograph
