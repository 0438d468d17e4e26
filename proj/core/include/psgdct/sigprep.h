#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psgdct/spectral.h"

namespace psgdct {

enum class ChannelKind { kEeg, kEcg, kRespiration, kSpo2, kOther };

std::string_view to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(std::string_view name);

// One channel of a recording. `valid` is either empty (every sample valid)
// or has one entry per sample.
struct ChannelSignal {
  RealVector samples;
  double fs = 0.0;
  ChannelKind kind = ChannelKind::kOther;
  std::vector<bool> valid;

  double duration_s() const { return fs > 0.0 ? static_cast<double>(samples.size()) / fs : 0.0; }
  bool is_valid(std::size_t i) const { return valid.empty() || valid[i]; }
};

struct WindowSpec {
  double length_min = 10.0;
  double overlap_fraction = 0.0;

  void validate() const;
  std::size_t length_samples(double fs) const;
  std::size_t stride_samples(double fs) const;
  double stride_s() const { return length_min * 60.0 * (1.0 - overlap_fraction); }
};

struct Window {
  ChannelKind kind = ChannelKind::kOther;
  std::size_t start_sample = 0;
  RealVector samples;
  double fs = 0.0;
  // Fraction of samples that were valid before interpolation.
  double valid_fraction = 1.0;

  // More than half of the samples were artifacts.
  bool flagged() const { return valid_fraction < 0.5; }
};

struct Passband {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

// Conventional passbands; SpO2 and Other are left unfiltered.
std::optional<Passband> default_passband(ChannelKind kind);

struct ArtifactRule {
  double clip_value = 0.0;
  // Minimum length of an exactly constant run to be masked; 0 disables.
  double flat_line_s = 5.0;
};

ArtifactRule default_artifact_rule(ChannelKind kind);

// Zero-phase Butterworth band-pass (4th-order high-pass edge, 6th-order
// low-pass edge, each run forward then backward). low_hz == 0 skips the
// high-pass edge.
ChannelSignal bandpass_filter(const ChannelSignal& sig, double low_hz, double high_hz);

struct MaskResult {
  ChannelSignal signal;
  std::vector<bool> mask;  // true = valid
};

// Marks |x| >= clip and constant runs of at least rule.flat_line_s seconds as
// invalid, merged with any mask already carried by `sig`, then replaces
// invalid samples by linear interpolation between valid neighbours. Leading
// and trailing invalid runs ramp from the valid-sample mean to the nearest
// valid sample.
MaskResult mask_artifacts(const ChannelSignal& sig, const ArtifactRule& rule);
MaskResult mask_artifacts(const ChannelSignal& sig, double clip_value);

std::size_t window_count(std::size_t n_samples, double fs, const WindowSpec& spec);
std::vector<Window> segment_windows(const ChannelSignal& sig, const WindowSpec& spec);

// Mask, filter with the kind's default passband, and segment.
std::vector<Window> preprocess_channel(const ChannelSignal& sig, const WindowSpec& spec);

}  // namespace psgdct
