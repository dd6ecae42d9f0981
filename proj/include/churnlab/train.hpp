#pragma once

#include "churnlab/model.hpp"
#include "churnlab/reg_loss.hpp"
#include "churnlab/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace churnlab {

/// Everything that determines a training run. seed_init draws the starting
/// parameters, seed_shuffle the minibatch order; together with the dataset
/// they fix the result bit-for-bit on a given build.
struct TrainConfig {
  std::uint64_t seed_init = 1;
  std::uint64_t seed_shuffle = 2;
  double learning_rate = 0.1;
  double momentum = 0.9;
  Index batch_size = 32;
  Index epochs = 10;
  RegParams reg;
  double temperature = 1.0;
  // classification
  Arch arch = Arch::linear;
  Index hidden = 16;
  // retrieval
  XexVariant xex = XexVariant::sampled;
  std::optional<MiningSpec> mining;
  TempScaling scaling = TempScaling::lambda_squared;
  Index embed_dim = 16;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
      throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (!(temperature > 0.0)) throw std::invalid_argument("TrainConfig: temperature must be > 0");
  }
};

/// Thrown when a training loss goes non-finite; carries the failing epoch.
struct TrainingFailure : std::runtime_error {
  Index epoch;
  explicit TrainingFailure(Index e)
      : std::runtime_error("training diverged at epoch " + std::to_string(e)), epoch(e) {}
};

struct TrainedModel {
  ModelParams params;
  std::vector<double> epoch_loss;  // mean train loss per epoch
};

TrainedModel train_classifier(const TrainConfig& config, const Matrix& inputs,
                              const std::vector<Index>& labels, Index k_classes);

struct TrainedDual {
  DualEncoder enc;
  std::vector<double> epoch_loss;
};

TrainedDual train_dual_encoder(const TrainConfig& config, const Matrix& queries,
                               const Matrix& docs);

}  // namespace churnlab
