#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psgdct/features.h"
#include "psgdct/layers.h"
#include "psgdct/spectral.h"
#include "psgdct/tensor.h"

namespace psgdct {

struct ModelConfig {
  std::size_t num_blocks = 7;
  // DCT block goes after this (1-based) backbone block; nullopt = plain backbone.
  std::optional<std::size_t> dct_depth = 6;
  std::vector<std::size_t> channels_per_block{16, 24, 40, 80, 112, 160, 192};
  // Blocks 1..pool_blocks end with a 2x2 max-pool.
  std::size_t pool_blocks = 3;
  std::size_t static_dim = StaticFeatures::kCount;
  ThresholdMode threshold_mode = ThresholdMode::kSoft;
  std::uint64_t seed = 42;
  // 0 takes the extent of the training images; Model needs both set.
  std::size_t input_height = 0;
  std::size_t input_width = 0;
  double tau_init = 0.01;
  double scale_init = 1.0;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Copy of `cfg` with a zero input extent replaced by the image's.
ModelConfig resolve_input_shape(const ModelConfig& cfg, const FeatureImage& image);

std::string to_string(ThresholdMode mode);
ThresholdMode threshold_mode_from_string(const std::string& name);

struct BlockLayout {
  std::size_t offset = 0;
  Shape in_shape;
  Shape out_shape;
  bool pool = false;
  std::size_t param_count = 0;

  std::size_t weight_offset() const { return offset; }
  std::size_t gamma_offset() const { return offset + out_shape.channels * in_shape.channels * nn::kTaps; }
  std::size_t beta_offset() const { return gamma_offset() + out_shape.channels; }
};

struct DctLayout {
  std::size_t scale_offset = 0;
  std::size_t tau_offset = 0;
  Shape shape;
};

// Flat parameter vector layout. Order: block 1 {conv weight, gamma, beta},
// ..., the DCT block {scale, tau} right after its host block, then the head
// {weight, bias}.
struct ParameterLayout {
  std::vector<BlockLayout> blocks;
  std::optional<DctLayout> dct;
  std::size_t head_weight_offset = 0;
  std::size_t head_weight_count = 0;
  std::size_t head_bias_offset = 0;
  std::size_t total = 0;

  static ParameterLayout from_config(const ModelConfig& cfg);
};

// Recorded forward pass, consumed by Model::backward.
struct Trace {
  std::vector<nn::ConvBlockCache> blocks;
  std::optional<nn::DctBlockCache> dct;
  nn::HeadCache head;
  double logit = 0.0;
};

class Model {
 public:
  // Seeded He-style initialization.
  explicit Model(ModelConfig cfg);
  // Throws InvalidCheckpoint when `params` does not fit `cfg`.
  Model(ModelConfig cfg, std::vector<double> params);

  const ModelConfig& config() const noexcept { return cfg_; }
  const ParameterLayout& layout() const noexcept { return layout_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return params_; }
  Shape input_shape() const { return {1, cfg_.input_height, cfg_.input_width}; }

  // Zero-pads or crops a feature image to the configured input shape.
  Tensor prepare_input(const FeatureImage& img) const;

  // `statics` must already be standardized.
  double logit(const Tensor& input, std::span<const double> statics, Trace* trace = nullptr) const;
  double predict(const Tensor& input, std::span<const double> statics) const;

  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logit).
  void backward(const Trace& trace, double grad_logit, std::span<double> grads) const;

  // Projects thresholds back onto tau >= 0.
  void clamp_thresholds();

  nn::DctBlockParams dct_params() const;
  const nn::DctPlan* dct_plan() const { return dct_plan_ ? &*dct_plan_ : nullptr; }

 private:
  nn::ConvBlockParams block_params(std::size_t b) const;
  nn::ConvBlockGrads block_grads(std::size_t b, std::span<double> grads) const;
  nn::HeadParams head_params() const;

  ModelConfig cfg_;
  ParameterLayout layout_;
  std::vector<double> params_;
  std::optional<nn::DctPlan> dct_plan_;
};

double sigmoid(double z);

inline constexpr double kLogClamp = 1e-7;

struct LossValue {
  double loss = 0.0;
  double grad_logit = 0.0;
};

// Weighted binary cross-entropy on a logit, with the probability clamped to
// [1e-7, 1 - 1e-7]. The gradient is exact, including zero in the clamped
// region.
LossValue weighted_bce(double logit, int label, double weight);

// Per-covariate standardization fitted on training data only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> apply(std::span<const double> row) const;
};

}  // namespace psgdct
