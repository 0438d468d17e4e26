#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "psgdct/record.h"

namespace psgdct::synth {

struct SamplingRates {
  double eeg = 125.0;
  double ecg = 125.0;
  double respiration = 10.0;
  double spo2 = 1.0;
};

struct SynthConfig {
  std::size_t n_records = 200;
  double duration_h = 2.0;
  SamplingRates fs;
  // Scales every label-linked effect; 0 makes labels independent of signals.
  double effect_strength = 1.0;
  std::uint64_t seed = 42;
  double prevalence = 0.5;
  // When set, beats come at exactly this rate with no RR variability.
  std::optional<double> fixed_heart_rate_bpm;
  double ecg_noise_mv = 0.03;

  void validate() const;
};

struct GroundTruth {
  std::vector<double> beat_times_s;
  std::vector<EventAnnotation> events;
  int label = 0;
  StaticFeatures statics;
};

struct GeneratedRecord {
  SignalRecord record;
  GroundTruth truth;
};

// Fully determined by (cfg.seed, idx) and the remaining config fields.
GeneratedRecord generate_record(const SynthConfig& cfg, std::size_t idx);

// The label generate_record(cfg, idx) would assign, without rendering signals.
int record_label(const SynthConfig& cfg, std::size_t idx);

// Seeded permutation of labels, for null-regime corpora.
std::vector<int> shuffled_labels(std::span<const int> labels, std::uint64_t seed);

std::string record_id(std::size_t idx);

// --- building blocks, exposed for detector validation -----------------------

// Beats at a constant rate, first beat half an interval after t = 0.
std::vector<double> constant_rate_beats(double bpm, double duration_s);

// Heart rate ramping linearly from start_bpm to end_bpm over the record.
std::vector<double> ramp_rate_beats(double start_bpm, double end_bpm, double duration_s);

// Gaussian-bump QRS surrogate (1 mV, sigma 12 ms) at each beat time, plus
// slow baseline wander and white noise. Not a physiological morphology.
std::vector<double> render_ecg(std::span<const double> beat_times_s, double duration_s, double fs,
                               double noise_mv, std::mt19937_64& rng);

}  // namespace psgdct::synth
