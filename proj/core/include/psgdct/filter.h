#pragma once

#include <span>
#include <vector>

namespace psgdct::filter {

// One biquad in transposed direct form II, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

using SosCascade = std::vector<Biquad>;

// Digital Butterworth sections via the bilinear transform with pre-warping.
// `order` must be even and >= 2.
SosCascade butterworth_lowpass(int order, double cutoff_hz, double fs);
SosCascade butterworth_highpass(int order, double cutoff_hz, double fs);

// Causal filtering. `initial` scales the steady-state step response state of
// each section, so a constant input equal to `initial` passes without a
// start-up transient.
std::vector<double> sosfilt(const SosCascade& sos, std::span<const double> x, double initial);

// Forward-backward filtering with odd reflection padding and steady-state
// initial conditions. Output has zero phase and the squared magnitude
// response of `sos`.
std::vector<double> sosfiltfilt(const SosCascade& sos, std::span<const double> x);

// |H(e^{jw})| of the cascade at frequency `hz`.
double magnitude_response(const SosCascade& sos, double hz, double fs);

}  // namespace psgdct::filter
