#include "psgdct/sigprep.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psgdct/error.h"
#include "psgdct/filter.h"

namespace psgdct {

namespace {

constexpr int kHighpassOrder = 4;
constexpr int kLowpassOrder = 6;

}  // namespace

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kEeg:
      return "EEG";
    case ChannelKind::kEcg:
      return "ECG";
    case ChannelKind::kRespiration:
      return "RESP";
    case ChannelKind::kSpo2:
      return "SPO2";
    case ChannelKind::kOther:
      return "OTHER";
  }
  return "OTHER";
}

ChannelKind channel_kind_from_string(std::string_view name) {
  if (name == "EEG") return ChannelKind::kEeg;
  if (name == "ECG") return ChannelKind::kEcg;
  if (name == "RESP") return ChannelKind::kRespiration;
  if (name == "SPO2") return ChannelKind::kSpo2;
  if (name == "OTHER") return ChannelKind::kOther;
  throw InvalidInput("unknown channel kind '" + std::string(name) + "'");
}

void WindowSpec::validate() const {
  if (!(length_min >= 1.0 && length_min <= 120.0)) {
    throw InvalidParameter("window length must be within [1, 120] minutes");
  }
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw InvalidParameter("window overlap must be within [0, 1)");
  }
}

std::size_t WindowSpec::length_samples(double fs) const {
  return static_cast<std::size_t>(std::floor(length_min * 60.0 * fs));
}

std::size_t WindowSpec::stride_samples(double fs) const {
  const auto len = static_cast<double>(length_samples(fs));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(len * (1.0 - overlap_fraction))));
}

std::optional<Passband> default_passband(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kEeg:
      return Passband{0.3, 35.0};
    case ChannelKind::kEcg:
      return Passband{0.5, 40.0};
    case ChannelKind::kRespiration:
      return Passband{0.05, 1.0};
    case ChannelKind::kSpo2:
    case ChannelKind::kOther:
      return std::nullopt;
  }
  return std::nullopt;
}

ArtifactRule default_artifact_rule(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kEeg:
      return {500.0, 5.0};
    case ChannelKind::kEcg:
      return {10.0, 5.0};
    case ChannelKind::kRespiration:
      return {50.0, 5.0};
    case ChannelKind::kSpo2:
      // Oximetry is quantized and legitimately flat for long stretches.
      return {100.5, 0.0};
    case ChannelKind::kOther:
      return {std::numeric_limits<double>::max(), 0.0};
  }
  return {std::numeric_limits<double>::max(), 0.0};
}

ChannelSignal bandpass_filter(const ChannelSignal& sig, double low_hz, double high_hz) {
  if (!(sig.fs > 0.0)) throw InvalidParameter("sampling rate must be > 0");
  if (!(low_hz >= 0.0) || !(low_hz < high_hz) || !(high_hz < sig.fs / 2.0)) {
    throw InvalidParameter("band [" + std::to_string(low_hz) + ", " + std::to_string(high_hz) +
                           "] Hz is outside (0, fs/2) for fs=" + std::to_string(sig.fs));
  }
  filter::SosCascade sos = filter::butterworth_lowpass(kLowpassOrder, high_hz, sig.fs);
  if (low_hz > 0.0) {
    filter::SosCascade hp = filter::butterworth_highpass(kHighpassOrder, low_hz, sig.fs);
    sos.insert(sos.begin(), hp.begin(), hp.end());
  }
  ChannelSignal out = sig;
  out.samples = filter::sosfiltfilt(sos, sig.samples);
  return out;
}

MaskResult mask_artifacts(const ChannelSignal& sig, double clip_value) {
  ArtifactRule rule = default_artifact_rule(sig.kind);
  rule.clip_value = clip_value;
  return mask_artifacts(sig, rule);
}

MaskResult mask_artifacts(const ChannelSignal& sig, const ArtifactRule& rule) {
  if (!(rule.clip_value > 0.0)) throw InvalidParameter("clip value must be > 0");
  if (!(rule.flat_line_s >= 0.0)) throw InvalidParameter("flat-line duration must be >= 0");
  const std::size_t n = sig.samples.size();
  if (n == 0) throw EmptySignal("signal has no samples");

  std::vector<bool> mask(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = sig.samples[i];
    if (!sig.is_valid(i) || !std::isfinite(v) || std::abs(v) >= rule.clip_value) mask[i] = false;
  }

  if (rule.flat_line_s > 0.0) {
    const auto min_run = static_cast<std::size_t>(std::ceil(rule.flat_line_s * sig.fs));
    // Runs are scanned over valid samples only; invalid samples break a run.
    std::size_t i = 0;
    while (i < n) {
      if (!mask[i]) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < n && mask[j] && sig.samples[j] == sig.samples[i]) ++j;
      if (j - i >= min_run) std::fill(mask.begin() + i, mask.begin() + j, false);
      i = j;
    }
  }

  double valid_sum = 0.0;
  std::size_t valid_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) {
      valid_sum += sig.samples[i];
      ++valid_n;
    }
  }
  if (valid_n == 0) throw EmptySignal("every sample of the signal is masked");
  const double valid_mean = valid_sum / static_cast<double>(valid_n);

  MaskResult result{sig, mask};
  RealVector& y = result.signal.samples;
  std::size_t i = 0;
  while (i < n) {
    if (mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !mask[j]) ++j;
    // Invalid run [i, j).
    const bool has_left = i > 0;
    const bool has_right = j < n;
    const double left = has_left ? y[i - 1] : valid_mean;
    const double right = has_right ? y[j] : valid_mean;
    const double span = static_cast<double>(j - i + 1);
    for (std::size_t k = i; k < j; ++k) {
      const double t = static_cast<double>(k - i + 1) / span;
      y[k] = left + (right - left) * t;
    }
    i = j;
  }
  result.signal.valid = mask;
  return result;
}

std::size_t window_count(std::size_t n_samples, double fs, const WindowSpec& spec) {
  const std::size_t len = spec.length_samples(fs);
  if (len == 0 || n_samples < len) return 0;
  return (n_samples - len) / spec.stride_samples(fs) + 1;
}

std::vector<Window> segment_windows(const ChannelSignal& sig, const WindowSpec& spec) {
  spec.validate();
  if (!(sig.fs > 0.0)) throw InvalidParameter("sampling rate must be > 0");
  const std::size_t count = window_count(sig.samples.size(), sig.fs, spec);
  if (count == 0) {
    throw EmptySignal("signal of " + std::to_string(sig.duration_s()) +
                      " s is shorter than one window");
  }
  const std::size_t len = spec.length_samples(sig.fs);
  const std::size_t stride = spec.stride_samples(sig.fs);
  std::vector<Window> windows;
  windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    Window win;
    win.kind = sig.kind;
    win.fs = sig.fs;
    win.start_sample = w * stride;
    win.samples.assign(sig.samples.begin() + static_cast<std::ptrdiff_t>(win.start_sample),
                       sig.samples.begin() + static_cast<std::ptrdiff_t>(win.start_sample + len));
    if (!sig.valid.empty()) {
      std::size_t ok = 0;
      for (std::size_t k = 0; k < len; ++k) ok += sig.valid[win.start_sample + k] ? 1 : 0;
      win.valid_fraction = static_cast<double>(ok) / static_cast<double>(len);
    }
    windows.push_back(std::move(win));
  }
  return windows;
}

std::vector<Window> preprocess_channel(const ChannelSignal& sig, const WindowSpec& spec) {
  MaskResult masked = mask_artifacts(sig, default_artifact_rule(sig.kind));
  ChannelSignal clean = std::move(masked.signal);
  if (auto band = default_passband(sig.kind)) {
    // Keep the upper edge below Nyquist for low-rate channels.
    const double high = std::min(band->high_hz, 0.45 * clean.fs);
    if (band->low_hz < high) clean = bandpass_filter(clean, band->low_hz, high);
  }
  return segment_windows(clean, spec);
}

}  // namespace psgdct
