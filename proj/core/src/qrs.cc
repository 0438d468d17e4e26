#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "psgdct/error.h"
#include "psgdct/features.h"
#include "psgdct/filter.h"

namespace psgdct {
namespace {

constexpr double kRefractoryS = 0.250;
constexpr double kIntegrationS = 0.150;
constexpr double kSearchHalfWidthS = 0.075;
constexpr double kInitS = 2.0;
constexpr std::size_t kRecentPeaks = 8;
// Missed-beat search-back triggers after this multiple of the mean RR.
constexpr double kSearchBackFactor = 1.66;

std::vector<double> moving_average_centered(std::span<const double> x, std::size_t width) {
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  const std::size_t half = width / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(width);
  }
  return out;
}

double mean_of(const std::deque<double>& d) {
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

}  // namespace

std::vector<std::size_t> detect_r_peaks(const Window& ecg, double fs) {
  if (ecg.kind != ChannelKind::kEcg) throw InvalidInput("detect_r_peaks expects an ECG window");
  if (!(fs >= 100.0)) throw InvalidParameter("R-peak detection needs fs >= 100 Hz");
  const std::size_t n = ecg.samples.size();
  if (ecg.valid_fraction <= 0.0 || n < 5) return {};

  filter::SosCascade band = filter::butterworth_highpass(2, 5.0, fs);
  const filter::SosCascade lp = filter::butterworth_lowpass(2, 15.0, fs);
  band.insert(band.end(), lp.begin(), lp.end());
  const std::vector<double> filtered = filter::sosfiltfilt(band, ecg.samples);

  std::vector<double> energy(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double d = (2.0 * filtered[i + 2] + filtered[i + 1] - filtered[i - 1] -
                      2.0 * filtered[i - 2]) / 8.0;
    energy[i] = d * d;
  }
  const auto width = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(kIntegrationS * fs)));
  const std::vector<double> integrated = moving_average_centered(energy, width);

  const auto init_len = std::min(n, static_cast<std::size_t>(kInitS * fs));
  const double init_peak = *std::max_element(integrated.begin(), integrated.begin() + init_len);
  if (!(init_peak > 0.0)) return {};

  const auto refractory = static_cast<std::size_t>(std::lround(kRefractoryS * fs));
  std::deque<double> heights{init_peak};
  std::vector<std::size_t> beats;  // indices into `integrated`

  auto accept = [&](std::size_t i) {
    beats.push_back(i);
    heights.push_back(integrated[i]);
    if (heights.size() > kRecentPeaks) heights.pop_front();
  };
  auto is_local_max = [&](std::size_t i) {
    return integrated[i] > integrated[i - 1] && integrated[i] >= integrated[i + 1];
  };

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!is_local_max(i)) continue;
    const double threshold = 0.5 * mean_of(heights);

    if (beats.size() >= 2 && integrated[i] > threshold) {
      const double mean_rr = static_cast<double>(beats.back() - beats.front()) /
                             static_cast<double>(beats.size() - 1);
      const std::size_t last = beats.back();
      if (static_cast<double>(i - last) > kSearchBackFactor * mean_rr) {
        // Look for a missed beat between the last detection and this one.
        std::size_t best = 0;
        double best_val = 0.5 * threshold;
        for (std::size_t j = last + refractory; j + refractory <= i; ++j) {
          if (is_local_max(j) && integrated[j] > best_val) {
            best = j;
            best_val = integrated[j];
          }
        }
        if (best != 0) accept(best);
      }
    }

    if (integrated[i] <= threshold) continue;
    if (!beats.empty() && i - beats.back() < refractory) {
      if (integrated[i] > integrated[beats.back()]) {
        beats.back() = i;
        heights.back() = integrated[i];
      }
      continue;
    }
    accept(i);
  }

  const auto half = static_cast<std::size_t>(std::lround(kSearchHalfWidthS * fs));
  std::vector<std::size_t> peaks;
  peaks.reserve(beats.size());
  for (std::size_t b : beats) {
    const std::size_t lo = b >= half ? b - half : 0;
    const std::size_t hi = std::min(n, b + half + 1);
    const auto it = std::max_element(ecg.samples.begin() + static_cast<std::ptrdiff_t>(lo),
                                     ecg.samples.begin() + static_cast<std::ptrdiff_t>(hi));
    const auto idx = static_cast<std::size_t>(it - ecg.samples.begin());
    if (!peaks.empty() && idx < peaks.back() + refractory) continue;
    peaks.push_back(idx);
  }
  return peaks;
}

RrSequence rr_from_peaks(std::span<const std::size_t> peaks, double fs) {
  if (!(fs > 0.0)) throw InvalidParameter("sampling rate must be > 0");
  RrSequence rr;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    if (peaks[i] <= peaks[i - 1]) throw InvalidInput("peak indices must be strictly increasing");
    const double ms = static_cast<double>(peaks[i] - peaks[i - 1]) * 1000.0 / fs;
    if (ms >= kMinRrMs && ms <= kMaxRrMs) rr.intervals_ms.push_back(ms);
  }
  return rr;
}

HrvMetrics hrv_metrics(const RrSequence& rr) {
  const auto& x = rr.intervals_ms;
  const std::size_t n = x.size();
  HrvMetrics m;
  if (n == 0) return m;
  const double nd = static_cast<double>(n);
  m.mean_rr = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  if (n == 1) return m;

  double ss = 0.0;
  for (double v : x) ss += (v - m.mean_rr) * (v - m.mean_rr);
  m.sdnn = std::sqrt(ss / nd);

  double diff_ss = 0.0;
  std::size_t over = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = x[i + 1] - x[i];
    diff_ss += d * d;
    if (std::abs(d) > 50.0) ++over;
  }
  m.rmssd = std::sqrt(diff_ss / (nd - 1.0));
  m.nn50 = static_cast<double>(over);
  m.pnn50 = m.nn50 / (nd - 1.0) * 100.0;
  return m;
}

}  // namespace psgdct
