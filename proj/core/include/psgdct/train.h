#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "psgdct/checkpoint.h"
#include "psgdct/features.h"
#include "psgdct/model.h"

namespace psgdct {

// One subject's model input.
struct Sample {
  std::string id;
  int label = 0;
  std::vector<double> statics;  // raw covariates, StaticFeatures order
  FeatureImage image;
};

struct TrainHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 100;
  std::size_t patience = 15;
  // Tail share of the shuffled training set held out for early stopping; 0
  // trains on everything for max_epochs.
  double validation_fraction = 0.1;
  bool class_weighting = true;

  void validate() const;
  bool operator==(const TrainHyper&) const = default;
};

struct TrainResult {
  ModelCheckpoint checkpoint;
  std::vector<double> step_losses;
  std::vector<double> epoch_losses;
};

// Adam on class-weighted binary cross-entropy. Deterministic for a fixed
// config seed; thresholds are clamped to >= 0 after every step. When a
// validation split exists the parameters with the best validation AUC are
// returned (validation loss when the split holds a single class).
TrainResult train(const std::vector<Sample>& data, const ModelConfig& cfg, const TrainHyper& hyper);

// Scores `data` with a trained checkpoint; returns probabilities.
std::vector<double> predict(const ModelCheckpoint& ckpt, const std::vector<Sample>& data);

}  // namespace psgdct
