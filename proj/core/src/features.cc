#include "psgdct/features.h"

#include <cmath>
#include <string>

#include "psgdct/error.h"

namespace psgdct {

bool is_missing(double v) { return std::isnan(v); }

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kApnea:
      return "apnea";
    case EventKind::kHypopnea:
      return "hypopnea";
    case EventKind::kArousal:
      return "arousal";
  }
  return "apnea";
}

EventKind event_kind_from_string(std::string_view name) {
  if (name == "apnea") return EventKind::kApnea;
  if (name == "hypopnea") return EventKind::kHypopnea;
  if (name == "arousal") return EventKind::kArousal;
  throw InvalidInput("unknown event kind '" + std::string(name) + "'");
}

namespace {
double safe_mean(double total, int count) { return count > 0 ? total / count : 0.0; }
}  // namespace

double EventStats::mean_apnea_duration_s() const { return safe_mean(apnea_duration_s, apnea_count); }
double EventStats::mean_hypopnea_duration_s() const {
  return safe_mean(hypopnea_duration_s, hypopnea_count);
}
double EventStats::mean_arousal_duration_s() const {
  return safe_mean(arousal_duration_s, arousal_count);
}

const std::vector<std::string>& StaticFeatures::names() {
  static const std::vector<std::string> kNames{"age", "sex", "race", "bmi", "sbp", "dbp"};
  return kNames;
}

StaticFeatures StaticFeatures::from_vector(std::span<const double> v) {
  if (v.size() != kCount) {
    throw InvalidInput("expected 6 static covariates, got " + std::to_string(v.size()));
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

void StaticFeatures::validate() const {
  auto check = [](double v, double lo, double hi, const char* name) {
    if (!std::isfinite(v) || v < lo || v > hi) {
      throw InvalidInput(std::string(name) + " = " + std::to_string(v) + " is outside [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  };
  check(age, 18.0, 100.0, "age");
  if (sex != 0.0 && sex != 1.0) throw InvalidInput("sex must be 0 or 1");
  if (!std::isfinite(race) || race < 0.0 || race != std::floor(race)) {
    throw InvalidInput("race must be a small non-negative integer code");
  }
  check(bmi, 10.0, 80.0, "bmi");
  check(sbp, 70.0, 250.0, "sbp");
  check(dbp, 40.0, 150.0, "dbp");
}

StatDescriptors stat_descriptors(const Window& w) {
  if (w.flagged()) return {};
  return stat_descriptors(w.samples);
}

StatDescriptors stat_descriptors(std::span<const double> x) {
  StatDescriptors s;
  if (x.empty()) return s;
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  s.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.std = std::sqrt(m2);
  if (s.std < 1e-12) {
    s.skewness = 0.0;
    s.kurtosis = 0.0;
  } else {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

EventStats event_stats(std::span<const EventAnnotation> events, double window_start_s,
                       double window_len_s) {
  if (!(window_len_s > 0.0)) throw InvalidParameter("window length must be > 0");
  EventStats st;
  const double end = window_start_s + window_len_s;
  for (const EventAnnotation& e : events) {
    const double mid = e.midpoint_s();
    if (mid < window_start_s || mid >= end) continue;
    switch (e.kind) {
      case EventKind::kApnea:
        ++st.apnea_count;
        st.apnea_duration_s += e.duration_s;
        break;
      case EventKind::kHypopnea:
        ++st.hypopnea_count;
        st.hypopnea_duration_s += e.duration_s;
        break;
      case EventKind::kArousal:
        ++st.arousal_count;
        st.arousal_duration_s += e.duration_s;
        break;
    }
  }
  return st;
}

FeatureSchema FeatureSchema::for_channels(std::span<const ChannelKind> channels) {
  FeatureSchema schema;
  schema.channels.assign(channels.begin(), channels.end());
  int counters[5] = {0, 0, 0, 0, 0};
  for (ChannelKind kind : channels) {
    const int idx = counters[static_cast<int>(kind)]++;
    const std::string prefix = std::string(to_string(kind)) + std::to_string(idx) + ".";
    switch (kind) {
      case ChannelKind::kEeg:
      case ChannelKind::kRespiration:
        for (const char* f : {"mean", "std", "skew", "kurt"}) schema.names.push_back(prefix + f);
        break;
      case ChannelKind::kSpo2:
        for (const char* f : {"mean", "std", "min"}) schema.names.push_back(prefix + f);
        break;
      case ChannelKind::kEcg:
        for (const char* f : {"mean_rr", "sdnn", "rmssd", "pnn50"}) schema.names.push_back(prefix + f);
        break;
      case ChannelKind::kOther:
        break;
    }
  }
  for (const char* f : {"apnea_count", "hypopnea_count", "arousal_count", "apnea_mean_dur",
                        "hypopnea_mean_dur"}) {
    schema.names.push_back(std::string("events.") + f);
  }
  return schema;
}

}  // namespace psgdct
