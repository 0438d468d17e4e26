#include <algorithm>
#include <cmath>

#include "psgdct/error.h"
#include "psgdct/features.h"

namespace psgdct {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

FeatureImage assemble_feature_image(const std::vector<std::vector<double>>& per_window,
                                    const FeatureSchema& schema) {
  const std::size_t windows = per_window.size();
  const std::size_t features = schema.size();
  if (windows == 0) throw EmptySignal("record has no windows");
  if (features == 0) throw InvalidInput("feature schema is empty");

  FeatureImage img;
  img.row_labels = schema.names;
  img.matrix = RealMatrix(features, windows);
  for (std::size_t t = 0; t < windows; ++t) {
    if (per_window[t].size() != features) {
      throw InvalidInput("window " + std::to_string(t) + " has " +
                         std::to_string(per_window[t].size()) + " features, schema expects " +
                         std::to_string(features));
    }
    for (std::size_t f = 0; f < features; ++f) {
      const double v = per_window[t][f];
      img.matrix(f, t) = std::isfinite(v) ? v : kMissing;
    }
  }

  for (std::size_t f = 0; f < features; ++f) {
    auto row = img.matrix.row(f);
    std::vector<double> valid;
    for (double v : row) {
      if (!is_missing(v)) valid.push_back(v);
    }
    const double fill = valid.empty() ? 0.0 : median(valid);
    for (double& v : row) {
      if (is_missing(v)) v = fill;
    }

    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(windows);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(windows));
    for (double& v : row) v = sd < 1e-12 ? 0.0 : (v - mean) / sd;
  }
  return img;
}

}  // namespace psgdct
