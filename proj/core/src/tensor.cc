#include "psgdct/tensor.h"

#include <cmath>

#include "psgdct/error.h"

namespace psgdct {

std::string Shape::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.numel()) {
    throw InvalidInput("tensor of shape " + shape_.str() + " given " +
                       std::to_string(values_.size()) + " values");
  }
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace psgdct
