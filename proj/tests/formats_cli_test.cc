#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include "cli.h"
#include "psgdct/error.h"
#include "psgdct/formats.h"
#include "psgdct/synth.h"

namespace psgdct {
namespace {

namespace fs = std::filesystem;

// Fresh scratch directory per test, removed afterwards.
class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("psgdct_test_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Every regular file below `dir`, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
  }
  return files;
}

TEST(Formats, ChannelRoundTripAtFloatPrecision) {
  ChannelSignal s;
  s.fs = 125.0;
  s.kind = ChannelKind::kEeg;
  s.samples = {0.5, -1.25, 3.0, 1e-3};
  const ChannelSignal back = io::decode_channel(io::encode_channel(s), ChannelKind::kEeg);
  EXPECT_EQ(back.fs, 125.0);
  ASSERT_EQ(back.samples.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(back.samples[i], static_cast<double>(static_cast<float>(s.samples[i])));

  std::string bytes = io::encode_channel(s);
  bytes[4] = 9;
  EXPECT_THROW(io::decode_channel(bytes, ChannelKind::kEeg), FormatError);
  EXPECT_THROW(io::decode_channel(io::encode_channel(s).substr(0, 20), ChannelKind::kEeg), FormatError);
}

TEST(Formats, EventsRoundTripAndLineNumbers) {
  const std::vector<EventAnnotation> ev = {{EventKind::kApnea, 10.5, 12.0}, {EventKind::kArousal, 100.0, 3.0}};
  const auto back = io::decode_events(io::encode_events(ev));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].kind, EventKind::kArousal);
  EXPECT_EQ(back[0].start_s, 10.5);

  try {
    io::decode_events("# psgdct-events 1.0\nkind,start_s,duration_s\napnea,1,2\napnea,x,2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
  EXPECT_THROW(io::decode_events("# psgdct-events 2.0\nkind,start_s,duration_s\n"), FormatError);
  EXPECT_THROW(io::decode_events("kind,start_s,duration_s\n"), FormatError);
}

TEST(Formats, ManifestValidation) {
  io::RecordManifest m;
  m.id = "r1";
  m.statics = {60, 1, 0, 28, 120, 80};
  m.channels = {{ChannelKind::kEeg, 0, 125.0, "r1_eeg0.psgc"}};
  const io::RecordManifest back = io::decode_manifest(io::encode_manifest(m));
  EXPECT_EQ(back.id, "r1");
  EXPECT_EQ(back.channels[0].file, "r1_eeg0.psgc");
  EXPECT_EQ(back.statics.sbp, 120.0);

  io::RecordManifest dup = m;
  dup.channels.push_back(dup.channels[0]);
  EXPECT_THROW(dup.validate(), FormatError);
  io::RecordManifest bad_label = m;
  bad_label.label = 3;
  EXPECT_THROW(bad_label.validate(), FormatError);
  EXPECT_THROW(io::decode_manifest("{\"format_version\": \"1.0\"}"), FormatError);
  EXPECT_THROW(io::decode_manifest("{not json"), FormatError);
}

TEST(Formats, RecordDirectoryRoundTrip) {
  TempDir dir("record");
  synth::SynthConfig cfg;
  cfg.n_records = 1;
  cfg.duration_h = 0.05;
  const SignalRecord rec = synth::generate_record(cfg, 0).record;
  io::write_record(dir.path(), rec);
  const auto manifests = io::list_manifests(dir.path());
  ASSERT_EQ(manifests.size(), 1u);
  const SignalRecord back = io::read_record(manifests[0]);
  EXPECT_EQ(back.id, rec.id);
  EXPECT_EQ(back.label, rec.label);
  EXPECT_EQ(back.channel_kinds(), rec.channel_kinds());
  EXPECT_EQ(back.events.size(), rec.events.size());
  // Synthetic ECG is already at float precision.
  EXPECT_EQ(back.channels[1].samples, rec.channels[1].samples);
}

TEST(Formats, FeatureImageRoundTrip) {
  FeatureImage img;
  img.matrix = RealMatrix::from_rows({{0.123456789123, -2.0}, {1e-20, 3.5}});
  img.row_labels = {"a.mean", "b.std"};
  const std::string text = io::encode_feature_image(img);
  const FeatureImage back = io::decode_feature_image(text);
  EXPECT_EQ(back.row_labels, img.row_labels);
  EXPECT_NEAR(back.matrix(0, 0), 0.123456789, 1e-12);
  EXPECT_EQ(io::encode_feature_image(back), text);
  EXPECT_THROW(io::decode_feature_image("# psgdct-featureimage 3.0\n2\na,1,2\n"), FormatError);
  try {
    io::decode_feature_image("# psgdct-featureimage 1.0\n2\na,1,2\nb,1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(Formats, NumberFormatting) {
  EXPECT_EQ(io::format_number(-0.0, 6), "0");
  EXPECT_EQ(io::format_number(0.1, 9), "0.1");
  EXPECT_EQ(io::format_number(1.0 / 3.0, 4), "0.3333");
}

TEST(TextMatrix, ParseAndFormat) {
  const RealMatrix m = cli::parse_text_matrix("# comment\n1, 2\n\n3,4\n");
  EXPECT_EQ(m, RealMatrix::from_rows({{1, 2}, {3, 4}}));
  try {
    cli::parse_text_matrix("1,2\n3,oops\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(cli::parse_text_matrix("1,2\n3\n"), ParseError);
}

TEST(Cli, DctOfOnesIsDcOnly) {
  TempDir dir("dct");
  io::write_file(dir.path() / "m.txt", "1,1,1,1\n");
  const CliResult r = run_cli({"dct", "--forward", "--1d", (dir.path() / "m.txt").string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out, "2,0,0,0\n");
}

TEST(Cli, DctForwardInverseRoundTrip) {
  TempDir dir("dct_rt");
  const std::string input = "0.5,-1.25,3\n2,7.5,-0.125\n";
  io::write_file(dir.path() / "m.txt", input);
  const CliResult f = run_cli({"dct", "--forward", (dir.path() / "m.txt").string()});
  ASSERT_EQ(f.code, 0) << f.err;
  io::write_file(dir.path() / "f.txt", f.out);
  const CliResult i = run_cli({"dct", "--inverse", (dir.path() / "f.txt").string()});
  ASSERT_EQ(i.code, 0) << i.err;
  const RealMatrix a = cli::parse_text_matrix(input), b = cli::parse_text_matrix(i.out);
  ASSERT_EQ(a.rows(), b.rows());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a.values()[k], b.values()[k], 1e-9);
}

TEST(Cli, MalformedMatrixReportsLine) {
  TempDir dir("dct_bad");
  io::write_file(dir.path() / "m.txt", "1,2\n3,x\n");
  const CliResult r = run_cli({"dct", "--forward", (dir.path() / "m.txt").string()});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
  TempDir dir("usage");
  EXPECT_EQ(run_cli({"eval", "--features", dir.path().string(), "--dct-depth", "7"}).code, cli::kExitUsage);
  io::write_file(dir.path() / "cfg.json", "{\"window_min\": 10, \"bogus\": 1}");
  EXPECT_EQ(run_cli({"--config", (dir.path() / "cfg.json").string(), "synth", "--n", "2"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"dct", "--forward", "--inverse", "x"}).code, cli::kExitUsage);
}

TEST(Cli, SynthIsReproducible) {
  TempDir a("synth_a"), b("synth_b");
  const std::vector<std::string> common = {"synth", "--n", "3", "--duration-h", "0.05"};
  auto args_a = std::vector<std::string>{"--seed", "7", "--out", a.path().string(), "--quiet"};
  auto args_b = std::vector<std::string>{"--seed", "7", "--out", b.path().string(), "--quiet"};
  args_a.insert(args_a.end(), common.begin(), common.end());
  args_b.insert(args_b.end(), common.begin(), common.end());
  const CliResult ra = run_cli(args_a);
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(run_cli(args_b).code, 0);
  const auto ta = tree(a.path());
  EXPECT_EQ(ta.size(), 3u * 6u);
  EXPECT_EQ(ta, tree(b.path()));
}

TEST(Cli, ExtractSharesOneSchemaAndListsShortRecords) {
  TempDir root("extract");
  const fs::path records = root.path() / "records", features = root.path() / "features";
  ASSERT_EQ(run_cli({"--seed", "3", "--out", records.string(), "--quiet", "synth", "--n", "10", "--duration-h",
                     "0.5"})
                .code,
            0);
  synth::SynthConfig short_cfg;
  short_cfg.n_records = 1;
  short_cfg.duration_h = 0.1;
  SignalRecord short_rec = synth::generate_record(short_cfg, 0).record;
  short_rec.id = "short";
  io::write_record(records, short_rec);

  const CliResult r =
      run_cli({"--out", features.string(), "--quiet", "extract", "--records", records.string(), "--window-min", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const io::FeatureIndex index = io::decode_feature_index(io::read_file(features / "index.json"));
  EXPECT_EQ(index.records.size(), 10u);
  ASSERT_EQ(index.errors.size(), 1u);
  EXPECT_EQ(index.errors[0].id, "short");
  for (const auto& e : index.records) {
    const FeatureImage img = io::decode_feature_image(io::read_file(features / e.file));
    EXPECT_EQ(img.row_labels, index.schema);
    EXPECT_EQ(img.window_count(), 3u);
  }
  EXPECT_EQ(io::load_feature_corpus(features).size(), 10u);
}

}  // namespace
}  // namespace psgdct
