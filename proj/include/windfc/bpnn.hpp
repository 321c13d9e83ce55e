#pragma once

// Three-layer sigmoid feed-forward network trained by full-batch gradient
// descent on e = 1/2 * sum (y - u)^2.

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "windfc/error.hpp"
#include "windfc/parallel.hpp"
#include "windfc/preprocess.hpp"
#include "windfc/random.hpp"

namespace windfc {

/// Logistic function, evaluated so that neither branch overflows.
inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename Derived>
Eigen::ArrayXXd sigmoid(const Eigen::ArrayBase<Derived>& x) {
  const Eigen::ArrayXXd a = x;
  const Eigen::ArrayXXd e = (-a.abs()).exp();
  const Eigen::ArrayXXd r = 1.0 / (1.0 + e);
  return (a >= 0.0).select(r, e * r);
}

struct NetConfig {
  int input_dim = 1;
  int hidden_dim = 0;  // 0 selects 2 * input_dim + 1
  double learning_rate = 10.0;  // per-sample-mean step size
  int max_epochs = 5000;
  double target_error = 1e-4;
  std::uint64_t seed = 1;
  double weight_init_range = 0.5;

  int resolved_hidden() const { return hidden_dim > 0 ? hidden_dim : 2 * input_dim + 1; }

  void validate() const {
    if (input_dim < 1) throw InvalidInput("NetConfig: input_dim must be >= 1");
    if (hidden_dim < 0) throw InvalidInput("NetConfig: hidden_dim must be >= 0 (0 = 2M+1)");
    if (!(learning_rate > 0.0)) throw InvalidInput("NetConfig: learning_rate must be > 0");
    if (max_epochs < 1) throw InvalidInput("NetConfig: max_epochs must be >= 1");
    if (!(target_error >= 0.0)) throw InvalidInput("NetConfig: target_error must be >= 0");
    if (!(weight_init_range >= 0.0)) throw InvalidInput("NetConfig: weight_init_range must be >= 0");
  }

  bool operator==(const NetConfig&) const = default;
};

/// Weights are stored with one row per hidden unit.
struct NeuralNet {
  Matrix w;            // hidden x input
  Vector b_hidden;     // hidden
  Vector v;            // hidden (single output unit)
  double b_out = 0.0;
  NetConfig config;
  std::vector<double> train_curve;  // loss before each epoch's update

  int input_dim() const { return static_cast<int>(w.cols()); }
  int hidden_dim() const { return static_cast<int>(w.rows()); }

  /// Zero-initialized net with the shapes implied by `cfg`.
  static NeuralNet zeros(const NetConfig& cfg) {
    cfg.validate();
    NeuralNet net;
    const int h = cfg.resolved_hidden();
    net.config = cfg;
    net.config.hidden_dim = h;
    net.w = Matrix::Zero(h, cfg.input_dim);
    net.b_hidden = Vector::Zero(h);
    net.v = Vector::Zero(h);
    return net;
  }

  /// Uniform weights in [-weight_init_range, weight_init_range] from cfg.seed.
  static NeuralNet random(const NetConfig& cfg) {
    NeuralNet net = zeros(cfg);
    Rng rng = make_rng(cfg.seed);
    std::uniform_real_distribution<double> dist(-cfg.weight_init_range, cfg.weight_init_range);
    if (cfg.weight_init_range == 0.0) return net;
    for (Eigen::Index r = 0; r < net.w.rows(); ++r)
      for (Eigen::Index c = 0; c < net.w.cols(); ++c) net.w(r, c) = dist(rng);
    for (auto& b : net.b_hidden) b = dist(rng);
    for (auto& x : net.v) x = dist(rng);
    net.b_out = dist(rng);
    return net;
  }

  bool same_weights(const NeuralNet& o) const {
    return w == o.w && b_hidden == o.b_hidden && v == o.v && b_out == o.b_out;
  }
};

/// Training or evaluation samples: one row of X per target in y.
struct Batch {
  Matrix x;
  Vector y;

  Eigen::Index size() const { return x.rows(); }
};

struct ForwardResult {
  double u = 0.0;  // output
  Vector z;        // hidden activations
};

inline ForwardResult forward(const NeuralNet& net, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != net.w.cols())
    throw InvalidInput("forward: input has " + std::to_string(x.size()) + " values, network expects " +
                       std::to_string(net.w.cols()));
  const Eigen::Map<const Vector> in(x.data(), static_cast<Eigen::Index>(x.size()));
  ForwardResult r;
  r.z = sigmoid((net.w * in + net.b_hidden).array()).matrix();
  r.u = sigmoid(net.v.dot(r.z) + net.b_out);
  return r;
}

/// Outputs for every row of `x`.
inline Vector forward_batch(const NeuralNet& net, const Matrix& x) {
  if (x.cols() != net.w.cols())
    throw InvalidInput("forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                       std::to_string(net.w.cols()));
  const Matrix z = sigmoid(((x * net.w.transpose()).rowwise() + net.b_hidden.transpose()).array()).matrix();
  return sigmoid((z * net.v).array() + net.b_out).matrix();
}

namespace detail {
inline void require_batch(const NeuralNet& net, const Batch& batch) {
  if (batch.x.rows() == 0) throw InvalidInput("empty batch");
  if (batch.x.rows() != batch.y.size()) throw InvalidInput("batch has mismatched X rows and y length");
  if (batch.x.cols() != net.w.cols())
    throw InvalidInput("batch has " + std::to_string(batch.x.cols()) + " features, network expects " +
                       std::to_string(net.w.cols()));
}
}  // namespace detail

inline double loss(const NeuralNet& net, const Batch& batch) {
  detail::require_batch(net, batch);
  return 0.5 * (batch.y - forward_batch(net, batch.x)).squaredNorm();
}

/// Gradient of the batch loss with respect to every parameter.
struct Gradients {
  Matrix w;
  Vector b_hidden;
  Vector v;
  double b_out = 0.0;
  double loss = 0.0;  // at the parameters the gradient was taken
};

struct GradientNorms {
  double w = 0.0, b_hidden = 0.0, v = 0.0, b_out = 0.0, total = 0.0;
};

namespace detail {

/// In-place logistic function; same arithmetic as the array overload.
inline void sigmoid_inplace(Eigen::ArrayXXd& a, Eigen::ArrayXXd& e) {
  e = (-a.abs()).exp();
  a = (a >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
}

/// Buffers reused across epochs. Samples lie along columns.
struct GradientWorkspace {
  Matrix xt;              // input x N
  Eigen::RowVectorXd yt;  // 1 x N
  Eigen::ArrayXXd z, e;   // hidden x N
  Eigen::ArrayXXd u, eu;  // 1 x N
  Eigen::ArrayXXd delta_out, delta_hidden;

  explicit GradientWorkspace(const Batch& batch) : xt(batch.x.transpose()), yt(batch.y.transpose()) {}
};

inline void gradients_into(const NeuralNet& net, GradientWorkspace& ws, Gradients& g) {
  ws.z.resize(net.w.rows(), ws.xt.cols());
  ws.z.matrix().noalias() = net.w * ws.xt;
  ws.z.colwise() += net.b_hidden.array();
  sigmoid_inplace(ws.z, ws.e);
  ws.u.resize(1, ws.xt.cols());
  ws.u.matrix().noalias() = net.v.transpose() * ws.z.matrix();
  ws.u += net.b_out;
  sigmoid_inplace(ws.u, ws.eu);
  // err is kept in eu.
  ws.eu = ws.u - ws.yt.array();
  g.loss = 0.5 * ws.eu.square().sum();
  ws.delta_out = ws.eu * ws.u * (1.0 - ws.u);
  ws.delta_hidden.resize(ws.z.rows(), ws.z.cols());
  ws.delta_hidden.matrix().noalias() = net.v * ws.delta_out.matrix();
  ws.delta_hidden *= ws.z * (1.0 - ws.z);
  g.v.noalias() = ws.z.matrix() * ws.delta_out.matrix().transpose();
  g.b_out = ws.delta_out.sum();
  g.w.noalias() = ws.delta_hidden.matrix() * ws.xt.transpose();
  g.b_hidden = ws.delta_hidden.rowwise().sum().matrix();
}

}  // namespace detail

inline Gradients gradients(const NeuralNet& net, const Batch& batch) {
  detail::require_batch(net, batch);
  detail::GradientWorkspace ws(batch);
  Gradients g;
  detail::gradients_into(net, ws, g);
  return g;
}

struct StepResult {
  NeuralNet net;
  GradientNorms norms;
  double loss_before = 0.0;
};

namespace detail {

/// Applies one update in place and returns the gradient norms.
inline GradientNorms apply_step(NeuralNet& net, const Gradients& g, Eigen::Index batch_size) {
  GradientNorms n;
  n.w = g.w.norm();
  n.b_hidden = g.b_hidden.norm();
  n.v = g.v.norm();
  n.b_out = std::abs(g.b_out);
  n.total = std::sqrt(n.w * n.w + n.b_hidden * n.b_hidden + n.v * n.v + g.b_out * g.b_out);
  if (!std::isfinite(n.total) || !std::isfinite(g.loss))
    throw DivergenceError("backprop_step: non-finite gradient; reduce learning_rate", 0);
  const double lr = net.config.learning_rate / static_cast<double>(batch_size);
  net.w -= lr * g.w;
  net.b_hidden -= lr * g.b_hidden;
  net.v -= lr * g.v;
  net.b_out -= lr * g.b_out;
  return n;
}

}  // namespace detail

/// One full-batch gradient-descent update. The step is learning_rate times
/// the gradient of e divided by the batch size, so the learning rate does not
/// scale with the amount of training data. The input net is not modified.
inline StepResult backprop_step(const NeuralNet& net, const Batch& batch) {
  const Gradients g = gradients(net, batch);
  StepResult r{net, {}, g.loss};
  r.norms = detail::apply_step(r.net, g, batch.size());
  return r;
}

/// Trains from seeded random weights until the loss reaches target_error or
/// max_epochs updates have been applied. Equivalent to repeated backprop_step.
inline NeuralNet train(const NetConfig& config, const Batch& train_set) {
  NeuralNet net = NeuralNet::random(config);
  detail::require_batch(net, train_set);
  detail::GradientWorkspace ws(train_set);
  Gradients g;
  std::vector<double> curve;
  curve.reserve(config.max_epochs);
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    detail::gradients_into(net, ws, g);
    curve.push_back(g.loss);
    if (g.loss <= config.target_error && std::isfinite(g.loss)) break;
    try {
      detail::apply_step(net, g, train_set.size());
    } catch (const DivergenceError&) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + "; reduce learning_rate", epoch);
    }
  }
  net.train_curve = std::move(curve);
  return net;
}

// ---------------------------------------------------------------------------
// Hidden-width search

/// Widths 2m+1 for m = 2..10.
inline std::vector<int> default_hidden_candidates() {
  std::vector<int> out;
  for (int m = 2; m <= 10; ++m) out.push_back(2 * m + 1);
  return out;
}

struct HiddenWidthResult {
  NetConfig config;
  std::vector<int> widths;
  std::vector<double> validation_rmse;
};

/// Trains one net per candidate width and keeps the lowest validation RMSE;
/// ties go to the smaller width.
inline HiddenWidthResult select_hidden_width(const NetConfig& templ, const Batch& train_set, const Batch& validation,
                                             std::vector<int> candidates = default_hidden_candidates(),
                                             unsigned threads = 1) {
  if (validation.size() == 0) throw InvalidInput("select_hidden_width: validation split is empty");
  if (candidates.empty()) throw InvalidInput("select_hidden_width: no candidate widths");
  std::sort(candidates.begin(), candidates.end());
  HiddenWidthResult out;
  out.widths = candidates;
  out.validation_rmse.assign(candidates.size(), 0.0);
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    NetConfig cfg = templ;
    cfg.hidden_dim = candidates[i];
    const NeuralNet net = train(cfg, train_set);
    const Vector pred = forward_batch(net, validation.x);
    out.validation_rmse[i] = std::sqrt((pred - validation.y).squaredNorm() / static_cast<double>(validation.size()));
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (out.validation_rmse[i] < out.validation_rmse[best]) best = i;
  out.config = templ;
  out.config.hidden_dim = candidates[best];
  return out;
}

// ---------------------------------------------------------------------------
// Scaling shared by training and forecasting

/// Input min-max statistics plus the target mapping into
/// [target_low, target_high] inside the sigmoid's range.
struct Scaling {
  NormStats inputs;
  NormStats target;  // one column
  double target_low = 0.1;
  double target_high = 0.9;

  static Scaling fit(const Matrix& x, const Vector& y, double low = 0.1, double high = 0.9) {
    Scaling s;
    s.inputs = fit_norm(x);
    s.target = fit_norm(Matrix(y));
    s.target_low = low;
    s.target_high = high;
    return s;
  }

  Matrix scale_inputs(const Matrix& x) const { return apply_norm(inputs, x); }

  Vector scale_target(const Vector& y) const {
    const Vector unit = apply_norm(target, Matrix(y)).col(0);
    return (unit.array() * (target_high - target_low) + target_low).matrix();
  }

  Vector unscale_target(const Vector& u) const {
    const Vector unit = ((u.array() - target_low) / (target_high - target_low)).matrix();
    return invert_norm(target, Matrix(unit)).col(0);
  }

  bool operator==(const Scaling&) const = default;
};

// ---------------------------------------------------------------------------
// Persistence: little-endian binary, version 1.
//
//   magic "WFCBPNN1" | u32 version | u32 input | u32 hidden
//   config: f64 lr, u32 max_epochs, f64 target_error, u64 seed, f64 init_range
//   f64 w[hidden*input] (row-major) | f64 b_hidden[hidden] | f64 v[hidden] | f64 b_out
//   u64 curve_len | f64 curve[curve_len]
//   u32 n_in | f64 min[n_in] | f64 max[n_in] | u32 n_t | f64 min[n_t] | f64 max[n_t]
//   f64 target_low | f64 target_high

inline constexpr char kModelMagic[8] = {'W', 'F', 'C', 'B', 'P', 'N', 'N', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}
inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw InvalidInput("model file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw InvalidInput("model file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline void put_norm(std::ostream& out, const NormStats& s) {
  put_u32(out, static_cast<std::uint32_t>(s.columns()));
  for (double v : s.mins()) put_f64(out, v);
  for (double v : s.maxs()) put_f64(out, v);
}
inline NormStats get_norm(std::istream& in) {
  const auto n = get_u32(in);
  if (n > (1u << 20)) throw InvalidInput("model file: implausible column count");
  std::vector<double> mins(n), maxs(n);
  for (auto& v : mins) v = get_f64(in);
  for (auto& v : maxs) v = get_f64(in);
  return NormStats(std::move(mins), std::move(maxs));
}

}  // namespace detail

/// A trained network together with the scaling it was trained under.
struct ModelFile {
  NeuralNet net;
  Scaling scaling;
};

inline void save_model(std::ostream& out, const NeuralNet& net, const Scaling& scaling = {}) {
  out.write(kModelMagic, sizeof(kModelMagic));
  detail::put_u32(out, kModelVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(net.input_dim()));
  detail::put_u32(out, static_cast<std::uint32_t>(net.hidden_dim()));
  const auto& c = net.config;
  detail::put_f64(out, c.learning_rate);
  detail::put_u32(out, static_cast<std::uint32_t>(c.max_epochs));
  detail::put_f64(out, c.target_error);
  detail::put_u64(out, c.seed);
  detail::put_f64(out, c.weight_init_range);
  for (Eigen::Index r = 0; r < net.w.rows(); ++r)
    for (Eigen::Index col = 0; col < net.w.cols(); ++col) detail::put_f64(out, net.w(r, col));
  for (double b : net.b_hidden) detail::put_f64(out, b);
  for (double x : net.v) detail::put_f64(out, x);
  detail::put_f64(out, net.b_out);
  detail::put_u64(out, net.train_curve.size());
  for (double e : net.train_curve) detail::put_f64(out, e);
  detail::put_norm(out, scaling.inputs);
  detail::put_norm(out, scaling.target);
  detail::put_f64(out, scaling.target_low);
  detail::put_f64(out, scaling.target_high);
  if (!out) throw Error("save_model: write failed");
}

inline ModelFile load_model(std::istream& in) {
  char magic[sizeof(kModelMagic)];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kModelMagic))
    throw InvalidInput("not a model file (bad magic)");
  const auto version = detail::get_u32(in);
  if (version != kModelVersion) throw InvalidInput("unsupported model version " + std::to_string(version));
  ModelFile mf;
  NetConfig cfg;
  cfg.input_dim = static_cast<int>(detail::get_u32(in));
  cfg.hidden_dim = static_cast<int>(detail::get_u32(in));
  if (cfg.input_dim < 1 || cfg.hidden_dim < 1 || cfg.input_dim > 100000 || cfg.hidden_dim > 100000)
    throw InvalidInput("model file: invalid dimensions");
  cfg.learning_rate = detail::get_f64(in);
  cfg.max_epochs = static_cast<int>(detail::get_u32(in));
  cfg.target_error = detail::get_f64(in);
  cfg.seed = detail::get_u64(in);
  cfg.weight_init_range = detail::get_f64(in);
  mf.net = NeuralNet::zeros(cfg);
  for (Eigen::Index r = 0; r < mf.net.w.rows(); ++r)
    for (Eigen::Index c = 0; c < mf.net.w.cols(); ++c) mf.net.w(r, c) = detail::get_f64(in);
  for (auto& b : mf.net.b_hidden) b = detail::get_f64(in);
  for (auto& x : mf.net.v) x = detail::get_f64(in);
  mf.net.b_out = detail::get_f64(in);
  const auto curve = detail::get_u64(in);
  if (curve > static_cast<std::uint64_t>(cfg.max_epochs)) throw InvalidInput("model file: train curve too long");
  mf.net.train_curve.resize(curve);
  for (auto& e : mf.net.train_curve) e = detail::get_f64(in);
  mf.scaling.inputs = detail::get_norm(in);
  mf.scaling.target = detail::get_norm(in);
  mf.scaling.target_low = detail::get_f64(in);
  mf.scaling.target_high = detail::get_f64(in);
  if (mf.scaling.inputs.columns() != 0 && mf.scaling.inputs.columns() != static_cast<std::size_t>(cfg.input_dim))
    throw InvalidInput("model file: input scaling does not match network input dimension");
  return mf;
}

inline void save_model_file(const std::string& path, const NeuralNet& net, const Scaling& scaling = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  save_model(out, net, scaling);
}

inline ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace windfc
