#include "psgdct/layers.h"

#include <algorithm>
#include <cmath>

#include "psgdct/error.h"

namespace psgdct::nn {
namespace {

// Fixed-order four-way accumulation; results are reproducible run to run.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void im2col(const Tensor& x, std::vector<double>& columns) {
  const Shape& s = x.shape();
  const std::size_t k_len = s.channels * kTaps;
  columns.assign(s.plane() * k_len, 0.0);
  for (std::size_t y = 0; y < s.height; ++y) {
    for (std::size_t xx = 0; xx < s.width; ++xx) {
      double* col = columns.data() + (y * s.width + xx) * k_len;
      for (std::size_t ci = 0; ci < s.channels; ++ci) {
        for (std::size_t ky = 0; ky < kKernel; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(s.height)) continue;
          for (std::size_t kx = 0; kx < kKernel; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(xx + kx) - 1;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(s.width)) continue;
            col[ci * kTaps + ky * kKernel + kx] =
                x.at(ci, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
          }
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& dcol, Tensor& dx) {
  const Shape& s = dx.shape();
  const std::size_t k_len = s.channels * kTaps;
  for (std::size_t y = 0; y < s.height; ++y) {
    for (std::size_t xx = 0; xx < s.width; ++xx) {
      const double* col = dcol.data() + (y * s.width + xx) * k_len;
      for (std::size_t ci = 0; ci < s.channels; ++ci) {
        for (std::size_t ky = 0; ky < kKernel; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(s.height)) continue;
          for (std::size_t kx = 0; kx < kKernel; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(xx + kx) - 1;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(s.width)) continue;
            dx.at(ci, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) +=
                col[ci * kTaps + ky * kKernel + kx];
          }
        }
      }
    }
  }
}

}  // namespace

std::size_t conv_block_param_count(std::size_t in_channels, std::size_t out_channels) {
  return out_channels * in_channels * kTaps + 2 * out_channels;
}

Tensor conv_block_forward(const Tensor& x, std::size_t out_channels, const ConvBlockParams& p,
                          bool pool, ConvBlockCache* cache) {
  const Shape in = x.shape();
  const std::size_t k_len = in.channels * kTaps;
  if (p.weight.size() != out_channels * k_len || p.gamma.size() != out_channels ||
      p.beta.size() != out_channels) {
    throw InvalidInput("conv block parameters do not match input " + in.str() + " -> " +
                       std::to_string(out_channels) + " channels");
  }
  const std::size_t plane = in.plane();

  ConvBlockCache local;
  ConvBlockCache& c = cache ? *cache : local;
  c.in_shape = in;
  c.conv_shape = {out_channels, in.height, in.width};
  c.pool = pool;
  im2col(x, c.columns);

  c.conv_out.assign(out_channels * plane, 0.0);
  c.affine_out.assign(out_channels * plane, 0.0);
  for (std::size_t co = 0; co < out_channels; ++co) {
    const double* w = p.weight.data() + co * k_len;
    for (std::size_t px = 0; px < plane; ++px) {
      const double v = dot(w, c.columns.data() + px * k_len, k_len);
      c.conv_out[co * plane + px] = v;
      c.affine_out[co * plane + px] = p.gamma[co] * v + p.beta[co];
    }
  }

  if (!pool) {
    Tensor out(c.conv_shape);
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(0.0, c.affine_out[i]);
    return out;
  }

  const std::size_t oh = pooled_extent(in.height);
  const std::size_t ow = pooled_extent(in.width);
  Tensor out(Shape{out_channels, oh, ow});
  c.pool_argmax.assign(out_channels * oh * ow, 0);
  for (std::size_t co = 0; co < out_channels; ++co) {
    const double* a = c.affine_out.data() + co * plane;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (2 * oy) * in.width + 2 * ox;
        double best_val = std::max(0.0, a[best]);
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t y = 2 * oy + dy;
            const std::size_t xx = 2 * ox + dx;
            if (y >= in.height || xx >= in.width) continue;
            const std::size_t idx = y * in.width + xx;
            const double v = std::max(0.0, a[idx]);
            if (v > best_val) {
              best_val = v;
              best = idx;
            }
          }
        }
        out.at(co, oy, ox) = best_val;
        c.pool_argmax[(co * oh + oy) * ow + ox] = best;
      }
    }
  }
  return out;
}

Tensor conv_block_backward(const Tensor& grad_out, const ConvBlockCache& cache,
                           const ConvBlockParams& p, const ConvBlockGrads& g) {
  const Shape& in = cache.in_shape;
  const std::size_t out_channels = cache.conv_shape.channels;
  const std::size_t plane = in.plane();
  const std::size_t k_len = in.channels * kTaps;

  // Gradient w.r.t. the post-ReLU plane (pre-pool).
  std::vector<double> g_act(out_channels * plane, 0.0);
  if (cache.pool) {
    const auto go = grad_out.values();
    const std::size_t pooled = go.size() / out_channels;
    for (std::size_t co = 0; co < out_channels; ++co) {
      for (std::size_t i = 0; i < pooled; ++i) {
        g_act[co * plane + cache.pool_argmax[co * pooled + i]] += go[co * pooled + i];
      }
    }
  } else {
    const auto go = grad_out.values();
    std::copy(go.begin(), go.end(), g_act.begin());
  }

  std::vector<double> g_conv(out_channels * plane, 0.0);
  for (std::size_t co = 0; co < out_channels; ++co) {
    double dgamma = 0.0;
    double dbeta = 0.0;
    for (std::size_t px = 0; px < plane; ++px) {
      const std::size_t i = co * plane + px;
      const double ga = cache.affine_out[i] > 0.0 ? g_act[i] : 0.0;
      dgamma += ga * cache.conv_out[i];
      dbeta += ga;
      g_conv[i] = ga * p.gamma[co];
    }
    g.gamma[co] += dgamma;
    g.beta[co] += dbeta;
  }

  std::vector<double> dcol(plane * k_len, 0.0);
  for (std::size_t co = 0; co < out_channels; ++co) {
    double* dw = g.weight.data() + co * k_len;
    const double* w = p.weight.data() + co * k_len;
    for (std::size_t px = 0; px < plane; ++px) {
      const double gv = g_conv[co * plane + px];
      if (gv == 0.0) continue;
      axpy(gv, cache.columns.data() + px * k_len, dw, k_len);
      axpy(gv, w, dcol.data() + px * k_len, k_len);
    }
  }

  Tensor dx(in);
  col2im_add(dcol, dx);
  return dx;
}

Tensor dct_block_forward(const Tensor& x, const DctBlockParams& p, const DctPlan& plan,
                         DctBlockCache* cache) {
  const Shape& s = x.shape();
  if (plan.height.size() != s.height || plan.width.size() != s.width) {
    throw InvalidInput("DCT plan does not match input " + s.str());
  }
  if (p.scale.size() != s.numel() || p.tau.size() != s.channels) {
    throw InvalidInput("DCT block parameters do not match input " + s.str());
  }
  const std::size_t plane = s.plane();
  DctBlockCache local;
  DctBlockCache& c = cache ? *cache : local;
  c.shape = s;
  c.coeffs.assign(s.numel(), 0.0);
  c.scaled.assign(s.numel(), 0.0);

  Tensor out(s);
  std::vector<double> z(plane);
  for (std::size_t ch = 0; ch < s.channels; ++ch) {
    const double tau = p.tau[ch];
    if (!(tau >= 0.0)) throw InvalidParameter("DCT block threshold must be >= 0");
    std::span<double> coeffs(c.coeffs.data() + ch * plane, plane);
    spectral::dct2d_forward(x.channel(ch), coeffs, plan.height, plan.width);
    for (std::size_t i = 0; i < plane; ++i) {
      const double y = coeffs[i] * p.scale[ch * plane + i];
      c.scaled[ch * plane + i] = y;
      z[i] = spectral::threshold(y, tau, p.mode);
    }
    spectral::dct2d_inverse(z, out.channel(ch), plan.height, plan.width);
  }
  return out;
}

Tensor dct_block_backward(const Tensor& grad_out, const DctBlockCache& cache,
                          const DctBlockParams& p, const DctPlan& plan, const DctBlockGrads& g) {
  const Shape& s = cache.shape;
  const std::size_t plane = s.plane();
  Tensor dx(s);
  std::vector<double> gz(plane);
  std::vector<double> gx(plane);
  for (std::size_t ch = 0; ch < s.channels; ++ch) {
    const double tau = p.tau[ch];
    // The orthonormal inverse transform's adjoint is the forward transform.
    spectral::dct2d_forward(grad_out.channel(ch), gz, plan.height, plan.width);
    double dtau = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      const std::size_t k = ch * plane + i;
      const double y = cache.scaled[k];
      const bool kept = std::abs(y) > tau;
      const double gy = kept ? gz[i] : 0.0;
      if (kept && p.mode == ThresholdMode::kSoft) dtau -= std::copysign(1.0, y) * gz[i];
      g.scale[k] += gy * cache.coeffs[k];
      gx[i] = gy * p.scale[k];
    }
    g.tau[ch] += dtau;
    spectral::dct2d_inverse(gx, dx.channel(ch), plan.height, plan.width);
  }
  return dx;
}

std::size_t dct_block_active_count(const Tensor& x, const DctBlockParams& p, const DctPlan& plan) {
  DctBlockCache cache;
  dct_block_forward(x, p, plan, &cache);
  const std::size_t plane = cache.shape.plane();
  std::size_t active = 0;
  for (std::size_t k = 0; k < cache.scaled.size(); ++k) {
    if (spectral::threshold(cache.scaled[k], p.tau[k / plane], p.mode) != 0.0) ++active;
  }
  return active;
}

double head_forward(const Tensor& x, std::span<const double> statics, const HeadParams& p,
                    HeadCache* cache) {
  const Shape& s = x.shape();
  if (p.weight.size() != s.channels + statics.size() || p.bias.size() != 1) {
    throw InvalidInput("head parameters do not match " + std::to_string(s.channels) +
                       " channels + " + std::to_string(statics.size()) + " statics");
  }
  HeadCache local;
  HeadCache& c = cache ? *cache : local;
  c.in_shape = s;
  c.inputs.assign(s.channels + statics.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(s.plane());
  for (std::size_t ch = 0; ch < s.channels; ++ch) {
    double sum = 0.0;
    for (double v : x.channel(ch)) sum += v;
    c.inputs[ch] = sum * inv;
  }
  std::copy(statics.begin(), statics.end(), c.inputs.begin() + static_cast<std::ptrdiff_t>(s.channels));
  return dot(p.weight.data(), c.inputs.data(), c.inputs.size()) + p.bias[0];
}

Tensor head_backward(double grad_logit, const HeadCache& cache, const HeadParams& p,
                     const HeadGrads& g) {
  const Shape& s = cache.in_shape;
  for (std::size_t i = 0; i < cache.inputs.size(); ++i) g.weight[i] += grad_logit * cache.inputs[i];
  g.bias[0] += grad_logit;
  Tensor dx(s);
  const double inv = 1.0 / static_cast<double>(s.plane());
  for (std::size_t ch = 0; ch < s.channels; ++ch) {
    const double v = grad_logit * p.weight[ch] * inv;
    for (double& d : dx.channel(ch)) d = v;
  }
  return dx;
}

}  // namespace psgdct::nn
