#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "psgdct/sigprep.h"
#include "psgdct/spectral.h"

namespace psgdct {

// Marker for a feature value that could not be computed; replaced during
// feature-image assembly.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
bool is_missing(double v);

inline constexpr double kMinRrMs = 300.0;
inline constexpr double kMaxRrMs = 2000.0;

struct RrSequence {
  std::vector<double> intervals_ms;
};

struct HrvMetrics {
  double mean_rr = kMissing;
  double sdnn = kMissing;
  double rmssd = kMissing;
  double nn50 = kMissing;
  double pnn50 = kMissing;
};

struct StatDescriptors {
  double mean = kMissing;
  double std = kMissing;
  double skewness = kMissing;
  double kurtosis = kMissing;  // excess
};

enum class EventKind { kApnea, kHypopnea, kArousal };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view name);

struct EventAnnotation {
  EventKind kind = EventKind::kApnea;
  double start_s = 0.0;
  double duration_s = 0.0;

  double midpoint_s() const { return start_s + 0.5 * duration_s; }
};

struct EventStats {
  int apnea_count = 0;
  int hypopnea_count = 0;
  int arousal_count = 0;
  double apnea_duration_s = 0.0;
  double hypopnea_duration_s = 0.0;
  double arousal_duration_s = 0.0;

  double mean_apnea_duration_s() const;
  double mean_hypopnea_duration_s() const;
  double mean_arousal_duration_s() const;
};

struct StaticFeatures {
  double age = 0.0;
  double sex = 0.0;
  double race = 0.0;
  double bmi = 0.0;
  double sbp = 0.0;
  double dbp = 0.0;

  static constexpr std::size_t kCount = 6;
  static const std::vector<std::string>& names();

  std::vector<double> to_vector() const { return {age, sex, race, bmi, sbp, dbp}; }
  static StaticFeatures from_vector(std::span<const double> v);
  void validate() const;
};

// --- R-peak detection and HRV ------------------------------------------------

// Pan-Tompkins style detector: 5-15 Hz band-pass, five-point derivative,
// squaring, 150 ms moving-window integration, adaptive threshold at half the
// running mean of recent peak heights, 250 ms refractory period. Returns
// strictly increasing sample indices of the R peaks.
std::vector<std::size_t> detect_r_peaks(const Window& ecg, double fs);

RrSequence rr_from_peaks(std::span<const std::size_t> peaks, double fs);

HrvMetrics hrv_metrics(const RrSequence& rr);

StatDescriptors stat_descriptors(const Window& w);
StatDescriptors stat_descriptors(std::span<const double> x);

EventStats event_stats(std::span<const EventAnnotation> events, double window_start_s,
                       double window_len_s);

// --- Pseudo-image assembly ----------------------------------------------------

// Ordered per-window feature names derived from a channel list.
struct FeatureSchema {
  std::vector<ChannelKind> channels;
  std::vector<std::string> names;

  static FeatureSchema for_channels(std::span<const ChannelKind> channels);
  std::size_t size() const { return names.size(); }
};

// Feature matrix with one row per schema entry and one column per window.
struct FeatureImage {
  RealMatrix matrix;
  std::vector<std::string> row_labels;

  std::size_t feature_count() const { return matrix.rows(); }
  std::size_t window_count() const { return matrix.cols(); }
};

// `per_window[t][f]` holds feature f of window t (kMissing allowed). Missing
// cells take the row median of valid entries (0 for an all-missing row), then
// each row is z-scored with its own mean and population std (rows with
// std < 1e-12 become 0).
FeatureImage assemble_feature_image(const std::vector<std::vector<double>>& per_window,
                                    const FeatureSchema& schema);

}  // namespace psgdct
