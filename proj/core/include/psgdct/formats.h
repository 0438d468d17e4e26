#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psgdct/eval.h"
#include "psgdct/features.h"
#include "psgdct/record.h"
#include "psgdct/train.h"

// On-disk formats. Every file carries a format version; readers reject an
// unknown major version with FormatError.
namespace psgdct::io {

namespace fs = std::filesystem;

inline constexpr int kFormatMajor = 1;
inline constexpr int kFormatMinor = 0;
std::string format_version();  // "1.0"
void check_format_version(const std::string& version, const std::string& what);

// --- channel data (.psgc) ----------------------------------------------------
// 16-byte header, little-endian: "PSGC", u16 version, u16 reserved,
// u32 sample count, f32 sampling rate; then f32 samples.
inline constexpr std::uint16_t kChannelVersion = 1;

std::string encode_channel(const ChannelSignal& sig);
ChannelSignal decode_channel(const std::string& bytes, ChannelKind kind);
void write_channel(const fs::path& path, const ChannelSignal& sig);
ChannelSignal read_channel(const fs::path& path, ChannelKind kind);

// --- event annotations (.csv) --------------------------------------------------
// "# psgdct-events 1.0", header "kind,start_s,duration_s", one event per line.
std::string encode_events(const std::vector<EventAnnotation>& events);
std::vector<EventAnnotation> decode_events(const std::string& text);

// --- record manifest (.json) ---------------------------------------------------
struct ChannelEntry {
  ChannelKind kind = ChannelKind::kOther;
  int index = 0;
  double fs = 0.0;
  std::string file;  // relative to the manifest directory
};

struct RecordManifest {
  std::string id;
  int label = 0;
  StaticFeatures statics;
  std::vector<ChannelEntry> channels;
  std::string annotations;  // relative path, may be empty

  void validate() const;
};

std::string encode_manifest(const RecordManifest& m);
RecordManifest decode_manifest(const std::string& text);

// Writes `<dir>/<id>.json`, one .psgc per channel and `<id>_events.csv`.
void write_record(const fs::path& dir, const SignalRecord& rec);
SignalRecord read_record(const fs::path& manifest_path);
// Sorted manifest paths (*.json) in `dir`.
std::vector<fs::path> list_manifests(const fs::path& dir);

// --- feature image (.features) ----------------------------------------------
// "# psgdct-featureimage 1.0", then the window count T, then one line per
// feature "name,v1,...,vT" with 9 significant digits.
std::string encode_feature_image(const FeatureImage& img);
FeatureImage decode_feature_image(const std::string& text);

// --- feature corpus index (index.json) ------------------------------------
struct FeatureIndexEntry {
  std::string id;
  int label = 0;
  std::vector<double> statics;
  std::string file;
};

struct FeatureIndexError {
  std::string id;
  std::string message;
};

struct FeatureIndex {
  double window_min = 0.0;
  double overlap = 0.0;
  std::vector<std::string> schema;
  std::vector<FeatureIndexEntry> records;
  std::vector<FeatureIndexError> errors;
};

std::string encode_feature_index(const FeatureIndex& index);
FeatureIndex decode_feature_index(const std::string& text);

// Reads index.json and every feature file it lists. Throws ConfigError naming
// the offending record when a file's rows disagree with the index schema.
std::vector<Sample> load_feature_corpus(const fs::path& dir);

// --- reports --------------------------------------------------------------------
std::string format_fold_table(const FoldReport& report);
std::string encode_fold_report(const FoldReport& report);

// --- small helpers -------------------------------------------------------------
std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);
std::string format_number(double v, int significant);

}  // namespace psgdct::io
