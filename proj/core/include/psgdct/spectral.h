#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psgdct {

using RealVector = std::vector<double>;

// Dense row-major real matrix.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static RealMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const RealMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

enum class ThresholdMode { kSoft, kHard };

namespace spectral {

// Orthonormal DCT-II basis, row k holds c_k cos(pi (2n+1) k / 2N). The
// forward transform is C x and the inverse (orthonormal DCT-III) is C^T X.
class DctBasis {
 public:
  explicit DctBasis(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t k, std::size_t i) const { return c_[k * n_ + i]; }
  std::span<const double> coefficients() const noexcept { return c_; }

  // out = C x, or out = C^T x. `x` and `out` must not alias.
  void forward(std::span<const double> x, std::span<double> out) const;
  void inverse(std::span<const double> x, std::span<double> out) const;

 private:
  std::size_t n_;
  std::vector<double> c_;
};

RealVector dct_forward_1d(std::span<const double> x);
RealVector dct_inverse_1d(std::span<const double> x);

RealMatrix dct2d_forward(const RealMatrix& m);
RealMatrix dct2d_inverse(const RealMatrix& m);

// Separable 2D transform on a raw H x W row-major plane, with caller-owned
// bases. Used by the network layers to avoid rebuilding bases each call.
void dct2d_forward(std::span<const double> in, std::span<double> out, const DctBasis& height_basis,
                   const DctBasis& width_basis);
void dct2d_inverse(std::span<const double> in, std::span<double> out, const DctBasis& height_basis,
                   const DctBasis& width_basis);

double soft_threshold(double x, double tau);
double hard_threshold(double x, double tau);
double threshold(double x, double tau, ThresholdMode mode);

RealVector soft_threshold(std::span<const double> x, double tau);
RealVector hard_threshold(std::span<const double> x, double tau);
RealMatrix threshold(const RealMatrix& m, double tau, ThresholdMode mode);

// Elementwise product; the frequency-domain counterpart of convolution.
RealMatrix spectral_multiply(const RealMatrix& x, const RealMatrix& w);

}  // namespace spectral
}  // namespace psgdct
