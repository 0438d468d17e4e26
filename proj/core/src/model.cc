#include "psgdct/model.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "psgdct/error.h"

namespace psgdct {

std::string to_string(ThresholdMode mode) { return mode == ThresholdMode::kSoft ? "soft" : "hard"; }

ThresholdMode threshold_mode_from_string(const std::string& name) {
  if (name == "soft") return ThresholdMode::kSoft;
  if (name == "hard") return ThresholdMode::kHard;
  throw InvalidParameter("threshold mode must be 'soft' or 'hard', got '" + name + "'");
}

void ModelConfig::validate() const {
  if (num_blocks == 0) throw InvalidParameter("model needs at least one block");
  if (channels_per_block.size() != num_blocks) {
    throw InvalidParameter("channels_per_block has " + std::to_string(channels_per_block.size()) +
                           " entries for " + std::to_string(num_blocks) + " blocks");
  }
  for (std::size_t c : channels_per_block) {
    if (c == 0) throw InvalidParameter("block channel count must be >= 1");
  }
  if (dct_depth && (*dct_depth < 1 || *dct_depth >= num_blocks)) {
    throw InvalidParameter("dct_depth " + std::to_string(*dct_depth) + " must be in [1, " +
                           std::to_string(num_blocks - 1) + "]");
  }
  if (pool_blocks > num_blocks) throw InvalidParameter("pool_blocks exceeds num_blocks");
  if (!(tau_init >= 0.0)) throw InvalidParameter("tau_init must be >= 0");
  if (!std::isfinite(scale_init)) throw InvalidParameter("scale_init must be finite");
}

ModelConfig resolve_input_shape(const ModelConfig& cfg, const FeatureImage& image) {
  ModelConfig out = cfg;
  if (out.input_height == 0) out.input_height = image.feature_count();
  if (out.input_width == 0) out.input_width = image.window_count();
  return out;
}

ParameterLayout ParameterLayout::from_config(const ModelConfig& cfg) {
  cfg.validate();
  if (cfg.input_height == 0 || cfg.input_width == 0) throw InvalidParameter("input shape must be non-empty");
  ParameterLayout layout;
  Shape shape{1, cfg.input_height, cfg.input_width};
  std::size_t offset = 0;
  for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
    BlockLayout bl;
    bl.offset = offset;
    bl.in_shape = shape;
    bl.pool = b < cfg.pool_blocks;
    const std::size_t out_c = cfg.channels_per_block[b];
    bl.out_shape = bl.pool ? Shape{out_c, nn::pooled_extent(shape.height), nn::pooled_extent(shape.width)}
                           : Shape{out_c, shape.height, shape.width};
    bl.param_count = nn::conv_block_param_count(shape.channels, out_c);
    offset += bl.param_count;
    shape = bl.out_shape;
    layout.blocks.push_back(bl);

    if (cfg.dct_depth && *cfg.dct_depth == b + 1) {
      DctLayout d;
      d.shape = shape;
      d.scale_offset = offset;
      offset += shape.numel();
      d.tau_offset = offset;
      offset += shape.channels;
      layout.dct = d;
    }
  }
  layout.head_weight_offset = offset;
  layout.head_weight_count = shape.channels + cfg.static_dim;
  offset += layout.head_weight_count;
  layout.head_bias_offset = offset;
  offset += 1;
  layout.total = offset;
  return layout;
}

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)), layout_(ParameterLayout::from_config(cfg_)) {
  params_.assign(layout_.total, 0.0);
  std::mt19937_64 rng(cfg_.seed);
  for (const BlockLayout& bl : layout_.blocks) {
    const double fan_in = static_cast<double>(bl.in_shape.channels * nn::kTaps);
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / fan_in));
    for (std::size_t i = bl.weight_offset(); i < bl.gamma_offset(); ++i) params_[i] = he(rng);
    for (std::size_t i = bl.gamma_offset(); i < bl.beta_offset(); ++i) params_[i] = 1.0;
  }
  if (layout_.dct) {
    const DctLayout& d = *layout_.dct;
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(d.scale_offset), d.shape.numel(),
                cfg_.scale_init);
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(d.tau_offset), d.shape.channels,
                cfg_.tau_init);
  }
  // Head weights and bias start at zero: the initial prediction is 0.5 and
  // random image features do not swamp the static covariates early on.
  if (layout_.dct) dct_plan_.emplace(layout_.dct->shape.height, layout_.dct->shape.width);
}

Model::Model(ModelConfig cfg, std::vector<double> params)
    : cfg_(std::move(cfg)), layout_(ParameterLayout::from_config(cfg_)), params_(std::move(params)) {
  if (params_.size() != layout_.total) {
    throw InvalidCheckpoint("checkpoint holds " + std::to_string(params_.size()) +
                            " parameters, config requires " + std::to_string(layout_.total));
  }
  for (double v : params_) {
    if (!std::isfinite(v)) throw InvalidCheckpoint("checkpoint contains non-finite parameters");
  }
  if (layout_.dct) {
    for (std::size_t c = 0; c < layout_.dct->shape.channels; ++c) {
      if (params_[layout_.dct->tau_offset + c] < 0.0) {
        throw InvalidCheckpoint("checkpoint contains a negative threshold");
      }
    }
    dct_plan_.emplace(layout_.dct->shape.height, layout_.dct->shape.width);
  }
}

Tensor Model::prepare_input(const FeatureImage& img) const {
  Tensor t(input_shape());
  const std::size_t h = std::min(cfg_.input_height, img.matrix.rows());
  const std::size_t w = std::min(cfg_.input_width, img.matrix.cols());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) t.at(0, y, x) = img.matrix(y, x);
  }
  return t;
}

nn::ConvBlockParams Model::block_params(std::size_t b) const {
  const BlockLayout& bl = layout_.blocks[b];
  const std::span<const double> all(params_);
  const std::size_t out_c = bl.out_shape.channels;
  return {all.subspan(bl.weight_offset(), out_c * bl.in_shape.channels * nn::kTaps),
          all.subspan(bl.gamma_offset(), out_c), all.subspan(bl.beta_offset(), out_c)};
}

nn::ConvBlockGrads Model::block_grads(std::size_t b, std::span<double> grads) const {
  const BlockLayout& bl = layout_.blocks[b];
  const std::size_t out_c = bl.out_shape.channels;
  return {grads.subspan(bl.weight_offset(), out_c * bl.in_shape.channels * nn::kTaps),
          grads.subspan(bl.gamma_offset(), out_c), grads.subspan(bl.beta_offset(), out_c)};
}

nn::DctBlockParams Model::dct_params() const {
  if (!layout_.dct) throw InvalidInput("model has no DCT block");
  const DctLayout& d = *layout_.dct;
  const std::span<const double> all(params_);
  return {all.subspan(d.scale_offset, d.shape.numel()), all.subspan(d.tau_offset, d.shape.channels),
          cfg_.threshold_mode};
}

nn::HeadParams Model::head_params() const {
  const std::span<const double> all(params_);
  return {all.subspan(layout_.head_weight_offset, layout_.head_weight_count),
          all.subspan(layout_.head_bias_offset, 1)};
}

double Model::logit(const Tensor& input, std::span<const double> statics, Trace* trace) const {
  if (input.shape() != input_shape()) {
    throw InvalidInput("input shape " + input.shape().str() + " does not match model input " +
                       input_shape().str());
  }
  if (statics.size() != cfg_.static_dim) {
    throw InvalidInput("expected " + std::to_string(cfg_.static_dim) + " static covariates, got " +
                       std::to_string(statics.size()));
  }
  if (trace) {
    trace->blocks.assign(cfg_.num_blocks, {});
    trace->dct.reset();
  }
  Tensor x = input;
  for (std::size_t b = 0; b < cfg_.num_blocks; ++b) {
    x = nn::conv_block_forward(x, layout_.blocks[b].out_shape.channels, block_params(b),
                               layout_.blocks[b].pool, trace ? &trace->blocks[b] : nullptr);
    if (!x.all_finite()) throw NumericError("block" + std::to_string(b + 1), "non-finite activation");
    if (cfg_.dct_depth && *cfg_.dct_depth == b + 1) {
      nn::DctBlockCache* cache = nullptr;
      if (trace) cache = &trace->dct.emplace();
      x = nn::dct_block_forward(x, dct_params(), *dct_plan_, cache);
      if (!x.all_finite()) throw NumericError("dct", "non-finite activation");
    }
  }
  const double z = nn::head_forward(x, statics, head_params(), trace ? &trace->head : nullptr);
  if (!std::isfinite(z)) throw NumericError("head", "non-finite logit");
  if (trace) trace->logit = z;
  return z;
}

double Model::predict(const Tensor& input, std::span<const double> statics) const {
  return std::clamp(sigmoid(logit(input, statics)), 1e-12, 1.0 - 1e-12);
}

void Model::backward(const Trace& trace, double grad_logit, std::span<double> grads) const {
  if (grads.size() != layout_.total) throw InvalidInput("gradient buffer has the wrong size");
  const std::span<double> hw = grads.subspan(layout_.head_weight_offset, layout_.head_weight_count);
  const std::span<double> hb = grads.subspan(layout_.head_bias_offset, 1);
  Tensor g = nn::head_backward(grad_logit, trace.head, head_params(), {hw, hb});
  for (std::size_t b = cfg_.num_blocks; b-- > 0;) {
    if (cfg_.dct_depth && *cfg_.dct_depth == b + 1) {
      const DctLayout& d = *layout_.dct;
      nn::DctBlockGrads dg{grads.subspan(d.scale_offset, d.shape.numel()),
                           grads.subspan(d.tau_offset, d.shape.channels)};
      g = nn::dct_block_backward(g, *trace.dct, dct_params(), *dct_plan_, dg);
    }
    g = nn::conv_block_backward(g, trace.blocks[b], block_params(b), block_grads(b, grads));
  }
}

void Model::clamp_thresholds() {
  if (!layout_.dct) return;
  for (std::size_t c = 0; c < layout_.dct->shape.channels; ++c) {
    double& tau = params_[layout_.dct->tau_offset + c];
    tau = std::max(0.0, tau);
  }
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LossValue weighted_bce(double logit, int label, double weight) {
  const double p = sigmoid(logit);
  const double pc = std::clamp(p, kLogClamp, 1.0 - kLogClamp);
  LossValue v;
  v.loss = -weight * (label == 1 ? std::log(pc) : std::log(1.0 - pc));
  v.grad_logit = (p == pc) ? weight * (p - static_cast<double>(label)) : 0.0;
  return v;
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidInput("cannot fit a standardizer on zero rows");
  const std::size_t d = rows.front().size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) throw InvalidInput("ragged covariate rows");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  const double n = static_cast<double>(rows.size());
  for (double& m : s.mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) s.stddev[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  }
  for (double& sd : s.stddev) {
    sd = std::sqrt(sd / n);
    if (sd < 1e-12) sd = 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) throw InvalidInput("covariate row has the wrong width");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / stddev[j];
  return out;
}

}  // namespace psgdct
