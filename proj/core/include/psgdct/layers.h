#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "psgdct/spectral.h"
#include "psgdct/tensor.h"

// Network layers with hand-written reverse-mode rules. Every forward can
// record a cache; the matching backward consumes the upstream gradient,
// accumulates (+=) into the parameter gradient spans and returns the
// gradient with respect to the layer input.
namespace psgdct::nn {

inline constexpr std::size_t kKernel = 3;
inline constexpr std::size_t kTaps = kKernel * kKernel;

// 2x2 max-pool output extent; odd edges keep a partial window.
inline std::size_t pooled_extent(std::size_t n) { return (n + 1) / 2; }

// --- convolution block: 3x3 conv (stride 1, same padding) -> per-channel
// affine -> ReLU -> optional 2x2 max-pool.

struct ConvBlockParams {
  std::span<const double> weight;  // [out][in][3][3]
  std::span<const double> gamma;   // [out]
  std::span<const double> beta;    // [out]
};

struct ConvBlockGrads {
  std::span<double> weight;
  std::span<double> gamma;
  std::span<double> beta;
};

struct ConvBlockCache {
  Shape in_shape;
  Shape conv_shape;
  bool pool = false;
  std::vector<double> columns;   // [pixel][in * 9]
  std::vector<double> conv_out;  // before affine
  std::vector<double> affine_out;
  std::vector<std::size_t> pool_argmax;  // flat index into the pre-pool plane
};

std::size_t conv_block_param_count(std::size_t in_channels, std::size_t out_channels);

Tensor conv_block_forward(const Tensor& x, std::size_t out_channels, const ConvBlockParams& p,
                          bool pool, ConvBlockCache* cache = nullptr);

Tensor conv_block_backward(const Tensor& grad_out, const ConvBlockCache& cache,
                           const ConvBlockParams& p, const ConvBlockGrads& g);

// --- DCT block: per channel 2D DCT -> frequency scaling -> threshold ->
// inverse 2D DCT.

struct DctPlan {
  spectral::DctBasis height;
  spectral::DctBasis width;

  DctPlan(std::size_t h, std::size_t w) : height(h), width(w) {}
};

struct DctBlockParams {
  std::span<const double> scale;  // [channel][h][w]
  std::span<const double> tau;    // [channel]
  ThresholdMode mode = ThresholdMode::kSoft;
};

struct DctBlockGrads {
  std::span<double> scale;
  std::span<double> tau;
};

struct DctBlockCache {
  Shape shape;
  std::vector<double> coeffs;  // DCT of the input
  std::vector<double> scaled;  // coeffs * scale
};

Tensor dct_block_forward(const Tensor& x, const DctBlockParams& p, const DctPlan& plan,
                         DctBlockCache* cache = nullptr);

Tensor dct_block_backward(const Tensor& grad_out, const DctBlockCache& cache,
                          const DctBlockParams& p, const DctPlan& plan, const DctBlockGrads& g);

// Count of nonzero thresholded DCT coefficients, for sparsity diagnostics.
std::size_t dct_block_active_count(const Tensor& x, const DctBlockParams& p, const DctPlan& plan);

// --- classifier head: global average pool, concatenate static covariates,
// single linear unit. Returns the logit.

struct HeadParams {
  std::span<const double> weight;  // [channels + statics]
  std::span<const double> bias;    // [1]
};

struct HeadGrads {
  std::span<double> weight;
  std::span<double> bias;
};

struct HeadCache {
  Shape in_shape;
  std::vector<double> inputs;  // pooled features followed by statics
};

double head_forward(const Tensor& x, std::span<const double> statics, const HeadParams& p,
                    HeadCache* cache = nullptr);

Tensor head_backward(double grad_logit, const HeadCache& cache, const HeadParams& p,
                     const HeadGrads& g);

}  // namespace psgdct::nn
