#include "psgdct/spectral.h"

#include <cmath>
#include <numbers>
#include <string>

#include "psgdct/error.h"

namespace psgdct {

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw InvalidInput("matrix value count " + std::to_string(values_.size()) +
                       " does not match shape " + std::to_string(rows_) + "x" +
                       std::to_string(cols_));
  }
}

RealMatrix RealMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw InvalidInput("ragged matrix rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return RealMatrix(rows.size(), cols, std::move(values));
}

namespace spectral {
namespace {

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + ": non-finite input");
  }
}

void require_nonempty(const RealMatrix& m, const char* what) {
  if (m.rows() == 0 || m.cols() == 0) throw InvalidInput(std::string(what) + ": empty matrix");
  require_finite(m.values(), what);
}

void require_tau(double tau) {
  if (!(tau >= 0.0)) throw InvalidParameter("threshold tau must be >= 0");
}

}  // namespace

DctBasis::DctBasis(std::size_t n) : n_(n), c_(n * n) {
  if (n == 0) throw InvalidInput("DCT length must be >= 1");
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double ck = k == 0 ? scale0 : scale;
    for (std::size_t i = 0; i < n; ++i) {
      // Reduce the angle argument modulo 4N to keep cos() well conditioned.
      const std::size_t m = ((2 * i + 1) * k) % (4 * n);
      c_[k * n + i] = ck * std::cos(std::numbers::pi * static_cast<double>(m) /
                                    (2.0 * static_cast<double>(n)));
    }
  }
}

void DctBasis::forward(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < n_; ++k) {
    const double* row = c_.data() + k * n_;
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) acc += row[i] * x[i];
    out[k] = acc;
  }
}

void DctBasis::inverse(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < n_; ++i) out[i] = 0.0;
  for (std::size_t k = 0; k < n_; ++k) {
    const double* row = c_.data() + k * n_;
    const double xk = x[k];
    for (std::size_t i = 0; i < n_; ++i) out[i] += row[i] * xk;
  }
}

RealVector dct_forward_1d(std::span<const double> x) {
  if (x.empty()) throw InvalidInput("dct_forward_1d: empty input");
  require_finite(x, "dct_forward_1d");
  RealVector out(x.size());
  DctBasis(x.size()).forward(x, out);
  return out;
}

RealVector dct_inverse_1d(std::span<const double> x) {
  if (x.empty()) throw InvalidInput("dct_inverse_1d: empty input");
  require_finite(x, "dct_inverse_1d");
  RealVector out(x.size());
  DctBasis(x.size()).inverse(x, out);
  return out;
}

void dct2d_forward(std::span<const double> in, std::span<double> out, const DctBasis& height_basis,
                   const DctBasis& width_basis) {
  const std::size_t h = height_basis.size();
  const std::size_t w = width_basis.size();
  // Row pass into `out`, then column pass through a scratch column.
  for (std::size_t r = 0; r < h; ++r) {
    width_basis.forward(in.subspan(r * w, w), out.subspan(r * w, w));
  }
  std::vector<double> col(h);
  std::vector<double> res(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) col[r] = out[r * w + c];
    height_basis.forward(col, res);
    for (std::size_t r = 0; r < h; ++r) out[r * w + c] = res[r];
  }
}

void dct2d_inverse(std::span<const double> in, std::span<double> out, const DctBasis& height_basis,
                   const DctBasis& width_basis) {
  const std::size_t h = height_basis.size();
  const std::size_t w = width_basis.size();
  for (std::size_t r = 0; r < h; ++r) {
    width_basis.inverse(in.subspan(r * w, w), out.subspan(r * w, w));
  }
  std::vector<double> col(h);
  std::vector<double> res(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) col[r] = out[r * w + c];
    height_basis.inverse(col, res);
    for (std::size_t r = 0; r < h; ++r) out[r * w + c] = res[r];
  }
}

RealMatrix dct2d_forward(const RealMatrix& m) {
  require_nonempty(m, "dct2d_forward");
  RealMatrix out(m.rows(), m.cols());
  dct2d_forward(m.values(), out.values(), DctBasis(m.rows()), DctBasis(m.cols()));
  return out;
}

RealMatrix dct2d_inverse(const RealMatrix& m) {
  require_nonempty(m, "dct2d_inverse");
  RealMatrix out(m.rows(), m.cols());
  dct2d_inverse(m.values(), out.values(), DctBasis(m.rows()), DctBasis(m.cols()));
  return out;
}

double soft_threshold(double x, double tau) {
  require_tau(tau);
  const double mag = std::abs(x) - tau;
  if (mag <= 0.0) return 0.0;
  return std::copysign(mag, x);
}

double hard_threshold(double x, double tau) {
  require_tau(tau);
  return std::abs(x) > tau ? x : 0.0;
}

double threshold(double x, double tau, ThresholdMode mode) {
  return mode == ThresholdMode::kSoft ? soft_threshold(x, tau) : hard_threshold(x, tau);
}

RealVector soft_threshold(std::span<const double> x, double tau) {
  require_tau(tau);
  RealVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], tau);
  return out;
}

RealVector hard_threshold(std::span<const double> x, double tau) {
  require_tau(tau);
  RealVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = hard_threshold(x[i], tau);
  return out;
}

RealMatrix threshold(const RealMatrix& m, double tau, ThresholdMode mode) {
  require_tau(tau);
  RealMatrix out(m.rows(), m.cols());
  auto src = m.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = threshold(src[i], tau, mode);
  return out;
}

RealMatrix spectral_multiply(const RealMatrix& x, const RealMatrix& w) {
  if (x.rows() != w.rows() || x.cols() != w.cols()) {
    throw InvalidInput("spectral_multiply: shape mismatch " + std::to_string(x.rows()) + "x" +
                       std::to_string(x.cols()) + " vs " + std::to_string(w.rows()) + "x" +
                       std::to_string(w.cols()));
  }
  RealMatrix out(x.rows(), x.cols());
  auto a = x.values();
  auto b = w.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = a[i] * b[i];
  return out;
}

}  // namespace spectral
}  // namespace psgdct
