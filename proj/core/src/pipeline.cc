#include "psgdct/pipeline.h"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "psgdct/error.h"

namespace psgdct {

SignalRecord select_channels(const SignalRecord& rec, const std::vector<ChannelKind>& kinds) {
  if (kinds.empty()) return rec;
  SignalRecord out = rec;
  out.channels.clear();
  for (const ChannelSignal& c : rec.channels) {
    if (std::find(kinds.begin(), kinds.end(), c.kind) != kinds.end()) out.channels.push_back(c);
  }
  if (out.channels.empty()) throw InvalidInput("record " + rec.id + " has none of the selected channels");
  return out;
}

std::vector<std::vector<double>> window_features(const SignalRecord& rec, const WindowSpec& spec,
                                                 const FeatureSchema& schema) {
  spec.validate();
  if (rec.channels.empty()) throw InvalidInput("record " + rec.id + " has no channels");

  std::vector<std::vector<Window>> windows;
  std::size_t n_windows = std::numeric_limits<std::size_t>::max();
  for (const ChannelSignal& c : rec.channels) {
    windows.push_back(preprocess_channel(c, spec));
    n_windows = std::min(n_windows, windows.back().size());
  }

  const double window_s = spec.length_min * 60.0;
  std::vector<std::vector<double>> rows(n_windows);
  for (std::size_t t = 0; t < n_windows; ++t) {
    std::vector<double>& row = rows[t];
    row.reserve(schema.size());
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
      const Window& w = windows[c][t];
      switch (rec.channels[c].kind) {
        case ChannelKind::kEeg:
        case ChannelKind::kRespiration: {
          const StatDescriptors s = stat_descriptors(w);
          row.insert(row.end(), {s.mean, s.std, s.skewness, s.kurtosis});
          break;
        }
        case ChannelKind::kSpo2: {
          if (w.flagged()) {
            row.insert(row.end(), {kMissing, kMissing, kMissing});
          } else {
            const StatDescriptors s = stat_descriptors(w.samples);
            const double lo = *std::min_element(w.samples.begin(), w.samples.end());
            row.insert(row.end(), {s.mean, s.std, lo});
          }
          break;
        }
        case ChannelKind::kEcg: {
          HrvMetrics h;
          if (!w.flagged()) h = hrv_metrics(rr_from_peaks(detect_r_peaks(w, w.fs), w.fs));
          row.insert(row.end(), {h.mean_rr, h.sdnn, h.rmssd, h.pnn50});
          break;
        }
        case ChannelKind::kOther:
          break;
      }
    }
    const EventStats ev = event_stats(rec.events, static_cast<double>(t) * spec.stride_s(), window_s);
    row.insert(row.end(), {static_cast<double>(ev.apnea_count), static_cast<double>(ev.hypopnea_count),
                           static_cast<double>(ev.arousal_count), ev.mean_apnea_duration_s(),
                           ev.mean_hypopnea_duration_s()});
    if (row.size() != schema.size()) throw InvalidInput("feature row does not match the schema");
  }
  return rows;
}

FeatureImage record_feature_image(const SignalRecord& rec, const WindowSpec& spec) {
  const FeatureSchema schema = FeatureSchema::for_channels(rec.channel_kinds());
  return assemble_feature_image(window_features(rec, spec, schema), schema);
}

Sample record_to_sample(const SignalRecord& rec, const WindowSpec& spec) {
  Sample s;
  s.id = rec.id;
  s.label = rec.label;
  s.statics = rec.statics.to_vector();
  s.image = record_feature_image(rec, spec);
  return s;
}

io::FeatureIndex extract_corpus(const std::filesystem::path& records_dir, const std::filesystem::path& out_dir,
                                const ExtractOptions& options) {
  options.window.validate();
  const std::vector<std::filesystem::path> manifests = io::list_manifests(records_dir);
  if (manifests.empty()) throw ConfigError("no record manifests in " + records_dir.string());

  struct Outcome {
    std::string id;
    int label = 0;
    std::vector<double> statics;
    std::optional<FeatureImage> image;
    std::string error;
  };
  std::vector<Outcome> outcomes(manifests.size());

  auto work = [&](std::size_t i) {
    Outcome& o = outcomes[i];
    o.id = manifests[i].stem().string();
    try {
      const SignalRecord rec = select_channels(io::read_record(manifests[i]), options.channels);
      o.id = rec.id;
      o.label = rec.label;
      o.statics = rec.statics.to_vector();
      o.image = record_feature_image(rec, options.window);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, manifests.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < manifests.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < manifests.size(); i = next++) work(i);
      });
    }
  }

  std::vector<std::size_t> order(outcomes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return outcomes[a].id < outcomes[b].id; });

  io::FeatureIndex index;
  index.window_min = options.window.length_min;
  index.overlap = options.window.overlap_fraction;
  std::filesystem::create_directories(out_dir);
  for (std::size_t i : order) {
    Outcome& o = outcomes[i];
    if (o.image && index.schema.empty()) index.schema = o.image->row_labels;
    if (o.image && o.image->row_labels != index.schema) {
      o.error = "feature rows do not match the corpus schema";
      o.image.reset();
    }
    if (!o.image) {
      index.errors.push_back({o.id, o.error});
      continue;
    }
    const std::string file = o.id + ".features";
    io::write_file(out_dir / file, io::encode_feature_image(*o.image));
    index.records.push_back({o.id, o.label, o.statics, file});
  }
  io::write_file(out_dir / "index.json", io::encode_feature_index(index));
  if (index.records.empty()) throw Error("feature extraction failed for every record");
  return index;
}

}  // namespace psgdct
