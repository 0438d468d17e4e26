#include "psgdct/formats.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psgdct/error.h"

namespace psgdct::io {

using nlohmann::json;

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

std::uint16_t get_u16(const std::string& in, std::size_t pos) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(in[pos]) |
                                    (static_cast<unsigned char>(in[pos + 1]) << 8));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, long line) {
  const std::string t = trim(s);
  if (t.empty()) throw ParseError(line, "empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) throw ParseError(line, "not a number: '" + t + "'");
  return v;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
T json_get(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw FormatError(std::string(what) + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

std::string format_version() { return std::to_string(kFormatMajor) + "." + std::to_string(kFormatMinor); }

void check_format_version(const std::string& version, const std::string& what) {
  const auto dot = version.find('.');
  const std::string major = version.substr(0, dot);
  if (major != std::to_string(kFormatMajor)) {
    throw FormatError(what + ": unsupported format version '" + version + "'");
  }
}

std::string format_number(double v, int significant) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

// --- channel ---------------------------------------------------------------------

std::string encode_channel(const ChannelSignal& sig) {
  if (sig.samples.size() > 0xffffffffULL) throw InvalidInput("channel too long for PSGC");
  std::string out = "PSGC";
  put_u16(out, kChannelVersion);
  put_u16(out, 0);
  put_u32(out, static_cast<std::uint32_t>(sig.samples.size()));
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(sig.fs)));
  out.reserve(out.size() + 4 * sig.samples.size());
  for (double v : sig.samples) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

ChannelSignal decode_channel(const std::string& bytes, ChannelKind kind) {
  if (bytes.size() < 16 || bytes.compare(0, 4, "PSGC") != 0) throw FormatError("not a PSGC channel file");
  const std::uint16_t version = get_u16(bytes, 4);
  if (version != kChannelVersion) {
    throw FormatError("unsupported PSGC version " + std::to_string(version));
  }
  const std::uint32_t count = get_u32(bytes, 8);
  const float fs = std::bit_cast<float>(get_u32(bytes, 12));
  if (bytes.size() != 16 + 4ULL * count) {
    throw FormatError("PSGC payload holds " + std::to_string((bytes.size() - 16) / 4) +
                      " samples, header says " + std::to_string(count));
  }
  if (!(fs > 0.0f)) throw FormatError("PSGC sampling rate must be > 0");
  ChannelSignal sig;
  sig.kind = kind;
  sig.fs = static_cast<double>(fs);
  sig.samples.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    sig.samples[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, 16 + 4ULL * i)));
  }
  return sig;
}

void write_channel(const fs::path& path, const ChannelSignal& sig) { write_file(path, encode_channel(sig)); }

ChannelSignal read_channel(const fs::path& path, ChannelKind kind) {
  try {
    return decode_channel(read_file(path), kind);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// --- events ------------------------------------------------------------------------

std::string encode_events(const std::vector<EventAnnotation>& events) {
  std::string out = "# psgdct-events " + format_version() + "\nkind,start_s,duration_s\n";
  for (const EventAnnotation& e : events) {
    out += std::string(to_string(e.kind)) + "," + format_number(e.start_s, 17) + "," +
           format_number(e.duration_s, 17) + "\n";
  }
  return out;
}

std::vector<EventAnnotation> decode_events(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  bool saw_version = false;
  bool saw_header = false;
  std::vector<EventAnnotation> events;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# psgdct-events ";
      if (line.rfind(tag, 0) == 0) {
        check_format_version(line.substr(tag.size()), "events file");
        saw_version = true;
      }
      continue;
    }
    if (!saw_header) {
      if (line != "kind,start_s,duration_s") throw ParseError(lineno, "expected events header");
      saw_header = true;
      continue;
    }
    const auto parts = split(line, ',');
    if (parts.size() != 3) throw ParseError(lineno, "expected 3 fields");
    EventAnnotation e;
    try {
      e.kind = event_kind_from_string(trim(parts[0]));
    } catch (const InvalidInput& err) {
      throw ParseError(lineno, err.what());
    }
    e.start_s = parse_double(parts[1], lineno);
    e.duration_s = parse_double(parts[2], lineno);
    if (!(e.start_s >= 0.0) || !(e.duration_s > 0.0)) {
      throw ParseError(lineno, "event needs start_s >= 0 and duration_s > 0");
    }
    events.push_back(e);
  }
  if (!saw_version) throw FormatError("events file lacks a format version line");
  return events;
}

// --- manifest ----------------------------------------------------------------------

void RecordManifest::validate() const {
  if (id.empty()) throw FormatError("manifest has an empty record id");
  if (label != 0 && label != 1) throw FormatError("manifest " + id + ": label must be 0 or 1");
  statics.validate();
  std::vector<std::pair<ChannelKind, int>> seen;
  for (const ChannelEntry& c : channels) {
    const auto key = std::make_pair(c.kind, c.index);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw FormatError("manifest " + id + ": duplicate channel " + std::string(to_string(c.kind)) +
                        std::to_string(c.index));
    }
    seen.push_back(key);
    if (!(c.fs > 0.0)) throw FormatError("manifest " + id + ": channel fs must be > 0");
  }
  if (channels.empty()) throw FormatError("manifest " + id + ": no channels");
}

std::string encode_manifest(const RecordManifest& m) {
  json j;
  j["format_version"] = format_version();
  j["id"] = m.id;
  j["label"] = m.label;
  json st = json::object();
  const auto values = m.statics.to_vector();
  for (std::size_t i = 0; i < values.size(); ++i) st[StaticFeatures::names()[i]] = values[i];
  j["static"] = st;
  j["channels"] = json::array();
  for (const ChannelEntry& c : m.channels) {
    j["channels"].push_back(
        {{"kind", std::string(to_string(c.kind))}, {"index", c.index}, {"fs", c.fs}, {"file", c.file}});
  }
  j["annotations"] = m.annotations;
  return j.dump(2) + "\n";
}

RecordManifest decode_manifest(const std::string& text) {
  const json j = parse_json(text, "manifest");
  check_format_version(json_get<std::string>(j, "format_version", "manifest"), "manifest");
  RecordManifest m;
  m.id = json_get<std::string>(j, "id", "manifest");
  m.label = json_get<int>(j, "label", "manifest");
  const json st = json_get<json>(j, "static", "manifest");
  std::vector<double> values;
  for (const std::string& name : StaticFeatures::names()) values.push_back(json_get<double>(st, name.c_str(), "manifest static"));
  m.statics = StaticFeatures::from_vector(values);
  for (const json& c : json_get<json>(j, "channels", "manifest")) {
    ChannelEntry e;
    try {
      e.kind = channel_kind_from_string(json_get<std::string>(c, "kind", "manifest channel"));
    } catch (const InvalidInput& err) {
      throw FormatError(std::string("manifest channel: ") + err.what());
    }
    e.index = json_get<int>(c, "index", "manifest channel");
    e.fs = json_get<double>(c, "fs", "manifest channel");
    e.file = json_get<std::string>(c, "file", "manifest channel");
    m.channels.push_back(e);
  }
  m.annotations = j.value("annotations", std::string());
  try {
    m.validate();
  } catch (const InvalidInput& err) {
    throw FormatError("manifest " + m.id + ": " + err.what());
  }
  return m;
}

void write_record(const fs::path& dir, const SignalRecord& rec) {
  fs::create_directories(dir);
  RecordManifest m;
  m.id = rec.id;
  m.label = rec.label;
  m.statics = rec.statics;
  int counters[5] = {0, 0, 0, 0, 0};
  for (const ChannelSignal& c : rec.channels) {
    ChannelEntry e;
    e.kind = c.kind;
    e.index = counters[static_cast<int>(c.kind)]++;
    e.fs = static_cast<double>(static_cast<float>(c.fs));
    std::string kind(to_string(c.kind));
    std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char ch) { return std::tolower(ch); });
    e.file = rec.id + "_" + kind + std::to_string(e.index) + ".psgc";
    write_channel(dir / e.file, c);
    m.channels.push_back(e);
  }
  m.annotations = rec.id + "_events.csv";
  write_file(dir / m.annotations, encode_events(rec.events));
  write_file(dir / (rec.id + ".json"), encode_manifest(m));
}

SignalRecord read_record(const fs::path& manifest_path) {
  const RecordManifest m = decode_manifest(read_file(manifest_path));
  const fs::path base = manifest_path.parent_path();
  SignalRecord rec;
  rec.id = m.id;
  rec.label = m.label;
  rec.statics = m.statics;
  for (const ChannelEntry& e : m.channels) {
    ChannelSignal sig = read_channel(base / e.file, e.kind);
    if (std::abs(sig.fs - e.fs) > 1e-6 * e.fs) {
      throw FormatError(e.file + ": sampling rate disagrees with manifest");
    }
    rec.channels.push_back(std::move(sig));
  }
  if (!m.annotations.empty()) rec.events = decode_events(read_file(base / m.annotations));
  return rec;
}

std::vector<fs::path> list_manifests(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- feature image -------------------------------------------------------------

std::string encode_feature_image(const FeatureImage& img) {
  std::string out = "# psgdct-featureimage " + format_version() + "\n";
  out += std::to_string(img.window_count()) + "\n";
  for (std::size_t f = 0; f < img.feature_count(); ++f) {
    out += img.row_labels[f];
    for (double v : img.matrix.row(f)) out += "," + format_number(v, 9);
    out += "\n";
  }
  return out;
}

FeatureImage decode_feature_image(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  bool saw_version = false;
  long windows = -1;
  std::vector<std::string> labels;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# psgdct-featureimage ";
      if (line.rfind(tag, 0) == 0) {
        check_format_version(line.substr(tag.size()), "feature image");
        saw_version = true;
      }
      continue;
    }
    if (windows < 0) {
      const double w = parse_double(line, lineno);
      if (w < 1.0 || w != std::floor(w)) throw ParseError(lineno, "window count must be a positive integer");
      windows = static_cast<long>(w);
      continue;
    }
    const auto parts = split(line, ',');
    if (static_cast<long>(parts.size()) != windows + 1) {
      throw ParseError(lineno, "expected " + std::to_string(windows) + " values, got " +
                                   std::to_string(parts.size() - 1));
    }
    labels.push_back(trim(parts[0]));
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const double v = parse_double(parts[i], lineno);
      if (!std::isfinite(v)) throw ParseError(lineno, "non-finite feature value");
      values.push_back(v);
    }
  }
  if (!saw_version) throw FormatError("feature image lacks a format version line");
  if (windows < 0 || labels.empty()) throw FormatError("feature image has no rows");
  FeatureImage img;
  img.row_labels = std::move(labels);
  img.matrix = RealMatrix(img.row_labels.size(), static_cast<std::size_t>(windows), std::move(values));
  return img;
}

// --- feature index ------------------------------------------------------------

std::string encode_feature_index(const FeatureIndex& index) {
  json j;
  j["format_version"] = format_version();
  j["window_min"] = index.window_min;
  j["overlap"] = index.overlap;
  j["schema"] = index.schema;
  j["records"] = json::array();
  for (const FeatureIndexEntry& r : index.records) {
    j["records"].push_back({{"id", r.id}, {"label", r.label}, {"static", r.statics}, {"file", r.file}});
  }
  j["errors"] = json::array();
  for (const FeatureIndexError& e : index.errors) {
    j["errors"].push_back({{"id", e.id}, {"error", e.message}});
  }
  return j.dump(2) + "\n";
}

FeatureIndex decode_feature_index(const std::string& text) {
  const json j = parse_json(text, "feature index");
  check_format_version(json_get<std::string>(j, "format_version", "feature index"), "feature index");
  FeatureIndex index;
  index.window_min = json_get<double>(j, "window_min", "feature index");
  index.overlap = json_get<double>(j, "overlap", "feature index");
  index.schema = json_get<std::vector<std::string>>(j, "schema", "feature index");
  for (const json& r : json_get<json>(j, "records", "feature index")) {
    FeatureIndexEntry e;
    e.id = json_get<std::string>(r, "id", "feature index record");
    e.label = json_get<int>(r, "label", "feature index record");
    e.statics = json_get<std::vector<double>>(r, "static", "feature index record");
    e.file = json_get<std::string>(r, "file", "feature index record");
    index.records.push_back(std::move(e));
  }
  if (j.contains("errors")) {
    for (const json& e : j.at("errors")) {
      index.errors.push_back({json_get<std::string>(e, "id", "feature index error"),
                              json_get<std::string>(e, "error", "feature index error")});
    }
  }
  return index;
}

std::vector<Sample> load_feature_corpus(const fs::path& dir) {
  const FeatureIndex index = decode_feature_index(read_file(dir / "index.json"));
  std::vector<Sample> samples;
  for (const FeatureIndexEntry& e : index.records) {
    Sample s;
    s.id = e.id;
    s.label = e.label;
    s.statics = e.statics;
    if (s.statics.size() != StaticFeatures::kCount) {
      throw ConfigError("record " + e.id + ": expected 6 static covariates");
    }
    s.image = decode_feature_image(read_file(dir / e.file));
    if (s.image.row_labels != index.schema) {
      throw ConfigError("record " + e.id + ": feature rows do not match the corpus schema");
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ConfigError("feature corpus " + dir.string() + " lists no records");
  return samples;
}

// --- reports ---------------------------------------------------------------------

std::string format_fold_table(const FoldReport& report) {
  std::string out = "fold  n_test  n_pos  epochs  accuracy  auc\n";
  char buf[128];
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const FoldMetrics& m = report.folds[f];
    std::snprintf(buf, sizeof(buf), "%4zu  %6zu  %5zu  %6zu  %8.4f  %6.4f\n", f, m.n_test, m.n_pos, m.epochs,
                  m.accuracy, m.auc);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "mean  accuracy %.4f  auc %.4f (std %.4f)\n", report.mean_accuracy,
                report.mean_auc, report.std_auc);
  out += buf;
  return out;
}

std::string encode_fold_report(const FoldReport& report) {
  json j;
  j["format_version"] = format_version();
  j["folds"] = json::array();
  for (const FoldMetrics& m : report.folds) {
    j["folds"].push_back({{"accuracy", m.accuracy},
                          {"auc", m.auc},
                          {"n_test", m.n_test},
                          {"n_pos", m.n_pos},
                          {"epochs", m.epochs}});
  }
  j["mean_accuracy"] = report.mean_accuracy;
  j["mean_auc"] = report.mean_auc;
  j["std_auc"] = report.std_auc;
  return j.dump(2) + "\n";
}

}  // namespace psgdct::io
