#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace psgdct {

struct Shape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t plane() const { return height * width; }
  std::size_t numel() const { return channels * height * width; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// Dense (channels, height, width) activation, channel-major.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0) : shape_(shape), values_(shape.numel(), fill) {}
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t numel() const noexcept { return values_.size(); }

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return values_[(c * shape_.height + y) * shape_.width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return values_[(c * shape_.height + y) * shape_.width + x];
  }

  std::span<double> channel(std::size_t c) { return {values_.data() + c * shape_.plane(), shape_.plane()}; }
  std::span<const double> channel(std::size_t c) const {
    return {values_.data() + c * shape_.plane(), shape_.plane()};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const;
  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

}  // namespace psgdct
