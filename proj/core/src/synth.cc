#include "psgdct/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "psgdct/error.h"

namespace psgdct::synth {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kQrsSigmaS = 0.012;

std::uint64_t record_seed(std::uint64_t seed, std::size_t idx) {
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(idx) + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double normal(std::mt19937_64& rng, double mean, double sd) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Stored channel data is float32; generate at that precision so in-memory
// and on-disk corpora are identical.
void to_float_precision(std::vector<double>& v) {
  for (double& x : v) x = static_cast<double>(static_cast<float>(x));
}

std::size_t sample_count(double duration_s, double fs) {
  return static_cast<std::size_t>(std::floor(duration_s * fs));
}

std::vector<EventAnnotation> generate_events(std::mt19937_64& rng, double duration_s, double effect) {
  const double duration_h = duration_s / 3600.0;
  const double rate_h = std::exp(normal(rng, std::log(18.0), 0.35)) * std::exp(0.8 * effect);
  const int n_resp = std::poisson_distribution<int>(rate_h * duration_h)(rng);
  std::vector<EventAnnotation> events;
  for (int i = 0; i < n_resp; ++i) {
    const bool apnea = uniform(rng, 0.0, 1.0) < 0.4;
    const double dur = apnea ? uniform(rng, 10.0, 40.0) : uniform(rng, 10.0, 30.0);
    if (dur >= duration_s) continue;
    const double start = uniform(rng, 0.0, duration_s - dur);
    events.push_back({apnea ? EventKind::kApnea : EventKind::kHypopnea, start, dur});
    if (uniform(rng, 0.0, 1.0) < 0.6) {
      const double a_start = start + dur - 1.0;
      const double a_dur = std::min(uniform(rng, 3.0, 15.0), duration_s - a_start);
      if (a_dur > 0.0) events.push_back({EventKind::kArousal, a_start, a_dur});
    }
  }
  const int n_spont = std::poisson_distribution<int>(4.0 * duration_h)(rng);
  for (int i = 0; i < n_spont; ++i) {
    const double dur = uniform(rng, 3.0, 15.0);
    if (dur >= duration_s) continue;
    events.push_back({EventKind::kArousal, uniform(rng, 0.0, duration_s - dur), dur});
  }
  std::sort(events.begin(), events.end(), [](const EventAnnotation& a, const EventAnnotation& b) {
    if (a.start_s != b.start_s) return a.start_s < b.start_s;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return events;
}

std::vector<double> variable_rate_beats(std::mt19937_64& rng, double duration_s, double effect) {
  const double hr = uniform(rng, 56.0, 74.0);
  const double mean_rr = 60.0 / hr;
  // Positive subjects get damped autonomic variability.
  const double rr_sd = 0.045 * (1.0 - 0.5 * std::min(effect, 1.0));
  const double phi = 0.8;
  const double innov = rr_sd * std::sqrt(1.0 - phi * phi);
  const double rsa_hz = uniform(rng, 0.2, 0.3);
  std::vector<double> beats;
  double t = 0.5 * mean_rr;
  double ar = 0.0;
  while (t < duration_s) {
    beats.push_back(t);
    ar = phi * ar + normal(rng, 0.0, innov);
    const double rr = mean_rr + ar + 0.02 * std::sin(kTwoPi * rsa_hz * t);
    t += std::clamp(rr, 0.45, 1.4);
  }
  return beats;
}

ChannelSignal render_eeg(std::mt19937_64& rng, double duration_s, double fs,
                         std::span<const EventAnnotation> events) {
  ChannelSignal sig{{}, fs, ChannelKind::kEeg, {}};
  const std::size_t n = sample_count(duration_s, fs);
  sig.samples.resize(n);
  double x = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x = 0.9 * x + normal(rng, 0.0, 8.0);
    sig.samples[i] = x;
  }
  for (const EventAnnotation& e : events) {
    if (e.kind != EventKind::kArousal) continue;
    const auto lo = std::min(n, static_cast<std::size_t>(e.start_s * fs));
    const auto hi = std::min(n, static_cast<std::size_t>((e.start_s + e.duration_s) * fs));
    for (std::size_t i = lo; i < hi; ++i) {
      sig.samples[i] += 15.0 * std::sin(kTwoPi * 10.0 * static_cast<double>(i) / fs);
    }
  }
  to_float_precision(sig.samples);
  return sig;
}

ChannelSignal render_respiration(std::mt19937_64& rng, double duration_s, double fs,
                                 std::span<const EventAnnotation> events) {
  ChannelSignal sig{{}, fs, ChannelKind::kRespiration, {}};
  const std::size_t n = sample_count(duration_s, fs);
  std::vector<double> amplitude(n, 1.0);
  for (const EventAnnotation& e : events) {
    if (e.kind == EventKind::kArousal) continue;
    const double level = e.kind == EventKind::kApnea ? 0.05 : 0.4;
    const auto lo = std::min(n, static_cast<std::size_t>(e.start_s * fs));
    const auto hi = std::min(n, static_cast<std::size_t>((e.start_s + e.duration_s) * fs));
    for (std::size_t i = lo; i < hi; ++i) amplitude[i] = std::min(amplitude[i], level);
  }
  const double breath_hz = uniform(rng, 0.2, 0.3);
  const double phase0 = uniform(rng, 0.0, kTwoPi);
  sig.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    sig.samples[i] = amplitude[i] * std::sin(kTwoPi * breath_hz * t + phase0) + normal(rng, 0.0, 0.03);
  }
  to_float_precision(sig.samples);
  return sig;
}

ChannelSignal render_spo2(std::mt19937_64& rng, double duration_s, double fs, double effect,
                          std::span<const EventAnnotation> events) {
  ChannelSignal sig{{}, fs, ChannelKind::kSpo2, {}};
  const std::size_t n = sample_count(duration_s, fs);
  const double baseline = normal(rng, 96.0 - 0.5 * effect, 0.5);
  std::vector<double> drop(n, 0.0);
  for (const EventAnnotation& e : events) {
    if (e.kind == EventKind::kArousal) continue;
    const double depth = e.kind == EventKind::kApnea ? 4.0 : 2.5;
    const double onset = e.start_s + e.duration_s + 5.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dt = static_cast<double>(i) / fs - onset;
      if (dt < 0.0 || dt > 30.0) continue;
      drop[i] += depth * (1.0 - std::abs(dt - 15.0) / 15.0);
    }
  }
  sig.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sig.samples[i] = std::clamp(baseline - drop[i] + normal(rng, 0.0, 0.3), 70.0, 100.0);
  }
  to_float_precision(sig.samples);
  return sig;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_records == 0) throw InvalidParameter("n_records must be >= 1");
  if (!(duration_h > 0.0 && duration_h <= 24.0)) throw InvalidParameter("duration_h must be in (0, 24]");
  if (!(effect_strength >= 0.0)) throw InvalidParameter("effect_strength must be >= 0");
  if (!(prevalence > 0.0 && prevalence < 1.0)) throw InvalidParameter("prevalence must be in (0, 1)");
  for (double f : {fs.eeg, fs.ecg, fs.respiration, fs.spo2}) {
    if (!(f > 0.0)) throw InvalidParameter("sampling rates must be > 0");
  }
  if (fixed_heart_rate_bpm && !(*fixed_heart_rate_bpm >= 20.0 && *fixed_heart_rate_bpm <= 220.0)) {
    throw InvalidParameter("fixed heart rate must be in [20, 220] bpm");
  }
  if (!(ecg_noise_mv >= 0.0)) throw InvalidParameter("ecg noise must be >= 0");
}

std::string record_id(std::size_t idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rec%05zu", idx);
  return buf;
}

std::vector<double> constant_rate_beats(double bpm, double duration_s) {
  const double rr = 60.0 / bpm;
  std::vector<double> beats;
  for (std::size_t k = 0;; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * rr;
    if (t >= duration_s) break;
    beats.push_back(t);
  }
  return beats;
}

std::vector<double> ramp_rate_beats(double start_bpm, double end_bpm, double duration_s) {
  std::vector<double> beats;
  double t = 0.5 * 60.0 / start_bpm;
  while (t < duration_s) {
    beats.push_back(t);
    const double bpm = start_bpm + (end_bpm - start_bpm) * t / duration_s;
    t += 60.0 / bpm;
  }
  return beats;
}

std::vector<double> render_ecg(std::span<const double> beat_times_s, double duration_s, double fs,
                               double noise_mv, std::mt19937_64& rng) {
  const std::size_t n = sample_count(duration_s, fs);
  std::vector<double> x(n);
  const double wander_hz = uniform(rng, 0.1, 0.3);
  const double wander_phase = uniform(rng, 0.0, kTwoPi);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = 0.08 * std::sin(kTwoPi * wander_hz * t + wander_phase) +
           (noise_mv > 0.0 ? normal(rng, 0.0, noise_mv) : 0.0);
  }
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(5.0 * kQrsSigmaS * fs));
  for (double bt : beat_times_s) {
    const double amp = 1.0 + (noise_mv > 0.0 ? normal(rng, 0.0, 0.05) : 0.0);
    const auto center = static_cast<std::ptrdiff_t>(std::lround(bt * fs));
    for (std::ptrdiff_t i = center - reach; i <= center + reach; ++i) {
      if (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) continue;
      const double dt = static_cast<double>(i) / fs - bt;
      x[static_cast<std::size_t>(i)] += amp * std::exp(-0.5 * dt * dt / (kQrsSigmaS * kQrsSigmaS));
    }
  }
  return x;
}

GeneratedRecord generate_record(const SynthConfig& cfg, std::size_t idx) {
  cfg.validate();
  if (idx >= cfg.n_records) throw InvalidParameter("record index out of range");
  std::mt19937_64 rng(record_seed(cfg.seed, idx));
  const double duration_s = cfg.duration_h * 3600.0;

  GeneratedRecord out;
  GroundTruth& truth = out.truth;
  truth.label = uniform(rng, 0.0, 1.0) < cfg.prevalence ? 1 : 0;
  const double effect = cfg.effect_strength * truth.label;

  StaticFeatures& st = truth.statics;
  st.age = std::round(std::clamp(normal(rng, 63.0 + 3.0 * effect, 9.0), 40.0, 90.0));
  st.sex = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : 1.0;
  st.race = static_cast<double>(std::uniform_int_distribution<int>(0, 2)(rng));
  st.bmi = std::clamp(normal(rng, 29.0 + 1.5 * effect, 4.5), 18.0, 50.0);
  st.sbp = std::clamp(normal(rng, 122.0 + 28.0 * effect, 10.0), 90.0, 200.0);
  st.dbp = std::clamp(normal(rng, 72.0 + 14.0 * effect, 7.0), 50.0, 120.0);

  truth.events = generate_events(rng, duration_s, effect);
  truth.beat_times_s = cfg.fixed_heart_rate_bpm ? constant_rate_beats(*cfg.fixed_heart_rate_bpm, duration_s)
                                                : variable_rate_beats(rng, duration_s, effect);

  SignalRecord& rec = out.record;
  rec.id = record_id(idx);
  rec.label = truth.label;
  rec.statics = st;
  rec.events = truth.events;
  rec.channels.push_back(render_eeg(rng, duration_s, cfg.fs.eeg, truth.events));
  ChannelSignal ecg{render_ecg(truth.beat_times_s, duration_s, cfg.fs.ecg, cfg.ecg_noise_mv, rng),
                    cfg.fs.ecg, ChannelKind::kEcg, {}};
  to_float_precision(ecg.samples);
  rec.channels.push_back(std::move(ecg));
  rec.channels.push_back(render_respiration(rng, duration_s, cfg.fs.respiration, truth.events));
  rec.channels.push_back(render_spo2(rng, duration_s, cfg.fs.spo2, effect, truth.events));
  return out;
}

int record_label(const SynthConfig& cfg, std::size_t idx) {
  cfg.validate();
  if (idx >= cfg.n_records) throw InvalidParameter("record index out of range");
  std::mt19937_64 rng(record_seed(cfg.seed, idx));
  return uniform(rng, 0.0, 1.0) < cfg.prevalence ? 1 : 0;
}

std::vector<int> shuffled_labels(std::span<const int> labels, std::uint64_t seed) {
  std::vector<int> out(labels.begin(), labels.end());
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace psgdct::synth
