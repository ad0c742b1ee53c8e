#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

#include "hhash/embedding.hpp"
#include "hhash/householder.hpp"
#include "hhash/losses.hpp"

namespace hhash {

inline constexpr double kDefaultLearningRate = 0.1;
inline constexpr double kBitVarLearningRate = 0.01;

/// Default learning rate for a loss: 0.01 for BIT_VAR, 0.1 otherwise.
double default_learning_rate(LossKind kind);

struct TrainConfig {
  LossKind loss = LossKind::L2;
  double learning_rate = kDefaultLearningRate;
  int epochs = 300;
  int batch_size = 128;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  /// Config with the learning rate matched to `kind`.
  static TrainConfig for_loss(LossKind kind);
  /// Throws Error when learning_rate <= 0, epochs < 0 or batch_size < 1.
  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_losses;  ///< mean of the batch losses, per epoch
  double initial_loss = 0.0;         ///< full-data loss before the first step
  double final_loss = 0.0;           ///< full-data loss after the last step
  long steps = 0;                    ///< optimizer steps taken
  std::chrono::duration<double> elapsed{0.0};
};

struct FitResult {
  HouseholderStack stack;
  TrainReport report;
};

/// Learns a HouseholderStack with k reflections minimizing `cfg.loss` over the
/// normalized rows of `e`, by mini-batch Adam. Deterministic for fixed inputs.
/// epochs == 0 returns random_stack(k, cfg.seed) unchanged.
FitResult fit(const EmbeddingSet& e, const TrainConfig& cfg);

/// Called after every epoch with the epoch index and the current vectors.
using EpochCallback = std::function<void(int epoch, const HouseholderStack& stack)>;
FitResult fit(const EmbeddingSet& e, const TrainConfig& cfg, const EpochCallback& on_epoch_end);

/// Gradients of a scalar loss through Z = apply_stack(stack, x).
struct StackGradients {
  Matrix vectors;  ///< m x k, row i = d loss / d v_i
  Matrix input;    ///< b x k, d loss / d x
};

/// Reverse-mode pass through the reflection chain given dloss/dZ. O(b m k).
StackGradients stack_backprop(const HouseholderStack& stack, const Matrix& x, const Matrix& grad_out);

struct AdamState {
  Eigen::ArrayXXd first;   ///< first-moment estimate
  Eigen::ArrayXXd second;  ///< second-moment estimate
  long step = 0;

  AdamState() = default;
  AdamState(Eigen::Index rows, Eigen::Index cols)
      : first(Eigen::ArrayXXd::Zero(rows, cols)), second(Eigen::ArrayXXd::Zero(rows, cols)) {}
};

struct AdamParams {
  double learning_rate = kDefaultLearningRate;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update. Increments state.step before applying it.
void adam_step(Eigen::Ref<Matrix> params, const Matrix& grads, AdamState& state,
               const AdamParams& p);

}  // namespace hhash

namespace hhash::detail {

/// Replaces every row of `vectors` whose norm is <= kMinVectorNorm with a
/// fresh Gaussian direction and clears its Adam moments. Returns the count.
int reseed_degenerate_vectors(Matrix& vectors, AdamState& state, std::uint64_t& draw_counter,
                              std::uint64_t seed);

}  // namespace hhash::detail
