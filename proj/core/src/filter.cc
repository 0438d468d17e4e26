#include "psgdct/filter.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "psgdct/error.h"

namespace psgdct::filter {
namespace {

using cplx = std::complex<double>;

void check_design(int order, double cutoff_hz, double fs) {
  if (order < 2 || order % 2 != 0) throw InvalidParameter("Butterworth order must be even and >= 2");
  if (!(fs > 0.0)) throw InvalidParameter("sampling rate must be > 0");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < fs / 2.0)) {
    throw InvalidParameter("cutoff must lie in (0, fs/2)");
  }
}

// Left half-plane poles of the unit-cutoff analog prototype, one per conjugate pair.
std::vector<cplx> prototype_pole_pairs(int order) {
  std::vector<cplx> poles;
  for (int k = 1; k <= order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order - 1) / (2.0 * order);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

Biquad section_from_analog_pole(cplx s, double fs) {
  const cplx z = (2.0 * fs + s) / (2.0 * fs - s);
  Biquad q;
  q.a1 = -2.0 * z.real();
  q.a2 = std::norm(z);
  return q;
}

}  // namespace

SosCascade butterworth_lowpass(int order, double cutoff_hz, double fs) {
  check_design(order, cutoff_hz, fs);
  const double warped = 2.0 * fs * std::tan(std::numbers::pi * cutoff_hz / fs);
  SosCascade sos;
  for (cplx p : prototype_pole_pairs(order)) {
    Biquad q = section_from_analog_pole(warped * p, fs);
    const double g = (1.0 + q.a1 + q.a2) / 4.0;
    q.b0 = g;
    q.b1 = 2.0 * g;
    q.b2 = g;
    sos.push_back(q);
  }
  return sos;
}

SosCascade butterworth_highpass(int order, double cutoff_hz, double fs) {
  check_design(order, cutoff_hz, fs);
  const double warped = 2.0 * fs * std::tan(std::numbers::pi * cutoff_hz / fs);
  SosCascade sos;
  for (cplx p : prototype_pole_pairs(order)) {
    Biquad q = section_from_analog_pole(warped / p, fs);
    const double g = (1.0 - q.a1 + q.a2) / 4.0;
    q.b0 = g;
    q.b1 = -2.0 * g;
    q.b2 = g;
    sos.push_back(q);
  }
  return sos;
}

std::vector<double> sosfilt(const SosCascade& sos, std::span<const double> x, double initial) {
  std::vector<double> y(x.begin(), x.end());
  double level = initial;
  for (const Biquad& q : sos) {
    const double gain = q.dc_gain();
    double z2 = (q.b2 - q.a2 * gain) * level;
    double z1 = (q.b1 - q.a1 * gain) * level + z2;
    for (double& v : y) {
      const double in = v;
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      v = out;
    }
    level *= gain;
  }
  return y;
}

std::vector<double> sosfiltfilt(const SosCascade& sos, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (sos.empty()) return {x.begin(), x.end()};
  std::size_t pad = 3 * (2 * sos.size() + 1);
  pad = std::min(pad, n - 1);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> fwd = sosfilt(sos, ext, ext.front());
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = sosfilt(sos, fwd, fwd.front());
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad),
          bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double magnitude_response(const SosCascade& sos, double hz, double fs) {
  const cplx zinv = std::polar(1.0, -2.0 * std::numbers::pi * hz / fs);
  cplx h = 1.0;
  for (const Biquad& q : sos) {
    const cplx num = q.b0 + q.b1 * zinv + q.b2 * zinv * zinv;
    const cplx den = 1.0 + q.a1 * zinv + q.a2 * zinv * zinv;
    h *= num / den;
  }
  return std::abs(h);
}

}  // namespace psgdct::filter
