#include "hhash/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hhash/errors.hpp"
#include "hhash/random.hpp"

namespace hhash {

namespace {

constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kReseedStream = 0xD1B54A32D192ED03ULL;

// Forward pass through the reflection chain that keeps the input of every
// reflection for the backward pass. inputs[i] is what H(v_i) receives.
class ChainWorkspace {
 public:
  void forward(const Matrix& vectors, const Matrix& x, Matrix& out) {
    const auto m = vectors.rows();
    inputs_.resize(static_cast<std::size_t>(m));
    out = x;
    for (Eigen::Index i = m - 1; i >= 0; --i) {
      inputs_[static_cast<std::size_t>(i)] = out;
      const auto v = vectors.row(i).transpose();
      proj_.noalias() = out * v;
      out.noalias() -= ((2.0 / v.squaredNorm()) * proj_) * v.transpose();
    }
  }

  // grad is dloss/dZ on entry and dloss/dX on exit.
  void backward(const Matrix& vectors, Matrix& grad, Matrix& vector_grads) {
    const auto m = vectors.rows();
    vector_grads.resize(m, vectors.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto v = vectors.row(i).transpose();
      const Matrix& xin = inputs_[static_cast<std::size_t>(i)];
      const double nv = v.squaredNorm();
      proj_.noalias() = xin * v;   // s_r = <v, x_r>
      gproj_.noalias() = grad * v;  // t_r = <v, g_r>
      Vector gv = xin.transpose() * gproj_;
      gv.noalias() += grad.transpose() * proj_;
      gv *= -2.0 / nv;
      gv += (4.0 * proj_.dot(gproj_) / (nv * nv)) * v;
      vector_grads.row(i) = gv.transpose();
      grad.noalias() -= ((2.0 / nv) * gproj_) * v.transpose();
    }
  }

 private:
  std::vector<Matrix> inputs_;
  Vector proj_;
  Vector gproj_;
};

double full_loss(LossKind kind, const Matrix& vectors, const Matrix& data) {
  Matrix z = data;
  apply_stack_inplace(HouseholderStack(vectors), z);
  return loss_value(kind, z);
}

}  // namespace

double default_learning_rate(LossKind kind) {
  return kind == LossKind::BIT_VAR ? kBitVarLearningRate : kDefaultLearningRate;
}

TrainConfig TrainConfig::for_loss(LossKind kind) {
  TrainConfig cfg;
  cfg.loss = kind;
  cfg.learning_rate = default_learning_rate(kind);
  return cfg;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error("learning rate must be finite and > 0");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (batch_size < 1) throw Error("batch size must be >= 1");
}

StackGradients stack_backprop(const HouseholderStack& stack, const Matrix& x, const Matrix& grad_out) {
  if (x.cols() != stack.dim() || grad_out.cols() != stack.dim() || grad_out.rows() != x.rows()) {
    throw DimensionError("stack_backprop: inconsistent shapes");
  }
  ChainWorkspace ws;
  Matrix z;
  ws.forward(stack.vectors(), x, z);
  StackGradients out;
  out.input = grad_out;
  ws.backward(stack.vectors(), out.input, out.vectors);
  return out;
}

void adam_step(Eigen::Ref<Matrix> params, const Matrix& grads, AdamState& state,
               const AdamParams& p) {
  if (grads.rows() != params.rows() || grads.cols() != params.cols() ||
      state.first.rows() != params.rows() || state.first.cols() != params.cols()) {
    throw DimensionError("adam_step: shape mismatch");
  }
  ++state.step;
  const auto g = grads.array();
  state.first = p.beta1 * state.first + (1.0 - p.beta1) * g;
  state.second = p.beta2 * state.second + (1.0 - p.beta2) * g.square();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(p.beta1, t);
  const double c2 = 1.0 - std::pow(p.beta2, t);
  params.array() -= p.learning_rate * (state.first / c1) / ((state.second / c2).sqrt() + p.epsilon);
}

namespace detail {

int reseed_degenerate_vectors(Matrix& vectors, AdamState& state, std::uint64_t& draw_counter,
                              std::uint64_t seed) {
  int replaced = 0;
  for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
    if (vectors.row(i).norm() > kMinVectorNorm) continue;
    Vector v;
    do {
      Rng rng(seed ^ kReseedStream ^ (draw_counter++ * 0xBF58476D1CE4E5B9ULL));
      v = gaussian_vector(static_cast<int>(vectors.cols()), rng);
    } while (!(v.norm() > kMinVectorNorm));
    vectors.row(i) = v.transpose();
    state.first.row(i).setZero();
    state.second.row(i).setZero();
    ++replaced;
  }
  return replaced;
}

}  // namespace detail

FitResult fit(const EmbeddingSet& e, const TrainConfig& cfg) { return fit(e, cfg, nullptr); }

FitResult fit(const EmbeddingSet& e, const TrainConfig& cfg, const EpochCallback& on_epoch_end) {
  cfg.validate();
  if (e.n() < 1 || e.k() < 1) throw EmptyInputError("fit: embedding set is empty");
  if (!e.data.allFinite()) throw NonFiniteError("fit: embeddings contain NaN or Inf");
  const auto start = std::chrono::steady_clock::now();

  const Matrix data = normalize_rows(e.data);
  const int n = e.n();
  const int k = e.k();

  Matrix vectors = random_stack(k, cfg.seed).vectors();
  TrainReport report;
  report.initial_loss = full_loss(cfg.loss, vectors, data);
  report.epoch_losses.reserve(static_cast<std::size_t>(cfg.epochs));

  AdamState adam(k, k);
  const AdamParams params{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon};
  Rng shuffle_rng(cfg.seed ^ kShuffleStream);
  std::uint64_t reseed_draws = 0;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  ChainWorkspace ws;
  Matrix batch, z, grad, vector_grads;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (int begin = 0; begin < n; begin += cfg.batch_size, ++batches) {
      const int b = std::min(cfg.batch_size, n - begin);
      batch.resize(b, k);
      for (int r = 0; r < b; ++r) batch.row(r) = data.row(order[static_cast<std::size_t>(begin + r)]);

      ws.forward(vectors, batch, z);
      double loss = 0.0;
      try {
        loss = loss_value(cfg.loss, z);
        grad = loss_grad(cfg.loss, z);
      } catch (const NonFiniteError&) {
        throw NonFiniteLossError(epoch, batches);
      }
      if (!std::isfinite(loss)) throw NonFiniteLossError(epoch, batches);
      loss_sum += loss;

      ws.backward(vectors, grad, vector_grads);
      adam_step(vectors, vector_grads, adam, params);
      detail::reseed_degenerate_vectors(vectors, adam, reseed_draws, cfg.seed);
    }
    report.epoch_losses.push_back(loss_sum / batches);
    if (on_epoch_end) on_epoch_end(epoch, HouseholderStack(vectors));
  }

  report.steps = adam.step;
  report.final_loss = full_loss(cfg.loss, vectors, data);
  report.elapsed = std::chrono::steady_clock::now() - start;
  return FitResult{HouseholderStack(std::move(vectors)), std::move(report)};
}

}  // namespace hhash
