#include "cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "psgdct/checkpoint.h"
#include "psgdct/error.h"
#include "psgdct/eval.h"
#include "psgdct/formats.h"
#include "psgdct/pipeline.h"
#include "psgdct/synth.h"
#include "run_config.h"

namespace psgdct::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out_dir;
  bool quiet = false;
};

class Log {
 public:
  Log(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
  void operator()(const std::string& line) const {
    if (!quiet_) err_ << line << '\n';
  }

 private:
  std::ostream& err_;
  bool quiet_;
};

RunConfig load_config(const GlobalFlags& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) {
    std::string text;
    try {
      text = io::read_file(g.config_path);
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
    cfg = parse_run_config(text);
  }
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

fs::path require_out(const GlobalFlags& g, const char* command) {
  if (g.out_dir.empty()) throw ConfigError(std::string(command) + " needs --out <dir>");
  return g.out_dir;
}

// Rejects a corpus extracted with a different window length than requested.
void check_window(const fs::path& features_dir, std::optional<double> window_min) {
  if (!window_min) return;
  const io::FeatureIndex index = io::decode_feature_index(io::read_file(features_dir / "index.json"));
  if (std::abs(index.window_min - *window_min) > 1e-9) {
    throw ConfigError("corpus was extracted with " + io::format_number(index.window_min, 6) +
                      "-minute windows, not " + io::format_number(*window_min, 6));
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string signed_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.*f", digits, v);
  return buf;
}

// --- synth ---------------------------------------------------------------------

struct SynthFlags {
  std::size_t n = 200;
  double duration_h = 2.0;
  double effect = 1.0;
  double prevalence = 0.5;
  bool shuffle_labels = false;
  std::size_t workers = 1;
};

int cmd_synth(const GlobalFlags& g, const SynthFlags& f, std::ostream& out, const Log& log) {
  const fs::path dir = require_out(g, "synth");
  synth::SynthConfig cfg;
  cfg.n_records = f.n;
  cfg.duration_h = f.duration_h;
  cfg.effect_strength = f.effect;
  cfg.prevalence = f.prevalence;
  cfg.seed = g.seed.value_or(42);
  try {
    cfg.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }

  std::vector<int> labels(cfg.n_records);
  for (std::size_t i = 0; i < cfg.n_records; ++i) labels[i] = synth::record_label(cfg, i);
  if (f.shuffle_labels) labels = synth::shuffled_labels(labels, cfg.seed);

  fs::create_directories(dir);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfg.n_records; i = next++) {
      synth::GeneratedRecord gen = synth::generate_record(cfg, i);
      gen.record.label = labels[i];
      io::write_record(dir, gen.record);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(f.workers, 1, cfg.n_records);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  log("synth: wrote " + std::to_string(cfg.n_records) + " records to " + dir.string());
  out << "records " << cfg.n_records << " positives " << positives << '\n';
  return kExitOk;
}

// --- extract -------------------------------------------------------------------

struct ExtractFlags {
  std::string records;
  std::optional<double> window_min;
  std::optional<double> overlap;
  std::optional<std::size_t> workers;
};

int cmd_extract(const GlobalFlags& g, const ExtractFlags& f, std::ostream& out, const Log& log) {
  RunConfig cfg = load_config(g);
  if (f.window_min) cfg.window_min = *f.window_min;
  if (f.overlap) cfg.overlap = *f.overlap;
  if (f.workers) cfg.workers = *f.workers;
  cfg.validate();
  const fs::path dir = require_out(g, "extract");

  ExtractOptions opts;
  opts.window = cfg.window();
  opts.channels = cfg.channels;
  opts.workers = cfg.workers;
  io::FeatureIndex index;
  try {
    index = extract_corpus(f.records, dir, opts);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  for (const io::FeatureIndexError& e : index.errors) log("extract: " + e.id + ": " + e.message);
  out << "extracted " << index.records.size() << " records, " << index.errors.size() << " failed\n";
  return kExitOk;
}

// --- train / eval -------------------------------------------------------------

struct ModelFlags {
  std::string features;
  std::optional<std::string> dct_depth;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> folds;
  std::optional<double> window_min;
  std::optional<std::string> threshold_mode;
  std::optional<std::size_t> workers;
};

RunConfig model_run_config(const GlobalFlags& g, const ModelFlags& f) {
  RunConfig cfg = load_config(g);
  if (f.dct_depth) cfg.dct_depths = parse_dct_depths(*f.dct_depth);
  if (f.epochs) cfg.hyper.max_epochs = *f.epochs;
  if (f.folds) cfg.folds = *f.folds;
  if (f.workers) cfg.workers = *f.workers;
  if (f.threshold_mode) {
    try {
      cfg.model.threshold_mode = threshold_mode_from_string(*f.threshold_mode);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.validate();
  return cfg;
}

int cmd_train(const GlobalFlags& g, const ModelFlags& f, std::ostream& out, const Log& log) {
  const RunConfig cfg = model_run_config(g, f);
  if (cfg.dct_depths.size() != 1) throw ConfigError("train takes a single --dct-depth");
  const fs::path dir = require_out(g, "train");
  check_window(f.features, f.window_min);
  const std::vector<Sample> data = io::load_feature_corpus(f.features);

  log("train: " + std::to_string(data.size()) + " records, dct depth " + depth_label(cfg.dct_depths[0]));
  const TrainResult result = train(data, cfg.model_for(cfg.dct_depths[0]), cfg.hyper);
  save_checkpoint(result.checkpoint, dir / "model.ckpt");
  const TrainingMetadata& m = result.checkpoint.meta;
  out << "epochs " << m.epochs << " best_epoch " << m.best_epoch << " final_loss "
      << io::format_number(m.final_loss, 6) << '\n';
  return kExitOk;
}

json sweep_row(DctDepth depth, const FoldReport& r, const FoldReport* reference) {
  json row;
  row["dct_depth"] = depth ? json(*depth) : json("none");
  row["mean_accuracy"] = r.mean_accuracy;
  row["mean_auc"] = r.mean_auc;
  row["std_auc"] = r.std_auc;
  if (reference) {
    row["delta_accuracy"] = r.mean_accuracy - reference->mean_accuracy;
    row["delta_auc"] = r.mean_auc - reference->mean_auc;
  }
  return row;
}

int cmd_eval(const GlobalFlags& g, const ModelFlags& f, std::ostream& out, const Log& log) {
  const RunConfig cfg = model_run_config(g, f);
  const fs::path dir = require_out(g, "eval");
  check_window(f.features, f.window_min);
  const std::vector<Sample> data = io::load_feature_corpus(f.features);

  CrossValidationOptions cv;
  cv.k = cfg.folds;
  cv.seed = cfg.seed;
  cv.workers = cfg.workers;

  std::vector<FoldReport> reports;
  for (const DctDepth& depth : cfg.dct_depths) {
    const auto t0 = std::chrono::steady_clock::now();
    reports.push_back(cross_validate(data, cfg.model_for(depth), cfg.hyper, cv));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log("eval: dct depth " + depth_label(depth) + " done in " + fixed(secs, 1) + " s");
  }

  if (cfg.dct_depths.size() == 1) {
    io::write_file(dir / "report.json", io::encode_fold_report(reports[0]));
    const std::string table = io::format_fold_table(reports[0]);
    io::write_file(dir / "report.txt", table);
    out << table;
    return kExitOk;
  }

  const FoldReport* reference = nullptr;
  for (std::size_t i = 0; i < cfg.dct_depths.size(); ++i) {
    if (!cfg.dct_depths[i]) reference = &reports[i];
  }
  json sweep;
  sweep["format_version"] = io::format_version();
  sweep["reference"] = reference ? json("none") : json(nullptr);
  sweep["rows"] = json::array();
  std::string table = "dct_depth  accuracy  auc     std_auc  delta_acc  delta_auc\n";
  for (std::size_t i = 0; i < cfg.dct_depths.size(); ++i) {
    const FoldReport& r = reports[i];
    const std::string label = depth_label(cfg.dct_depths[i]);
    io::write_file(dir / ("report_dct" + label + ".json"), io::encode_fold_report(r));
    sweep["rows"].push_back(sweep_row(cfg.dct_depths[i], r, reference));
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-9s  %8.4f  %6.4f  %7.4f  %9s  %9s\n", label.c_str(), r.mean_accuracy,
                  r.mean_auc, r.std_auc,
                  reference ? signed_fixed(r.mean_accuracy - reference->mean_accuracy, 4).c_str() : "n/a",
                  reference ? signed_fixed(r.mean_auc - reference->mean_auc, 4).c_str() : "n/a");
    table += buf;
  }
  io::write_file(dir / "sweep.json", sweep.dump(2) + "\n");
  io::write_file(dir / "sweep.txt", table);
  out << table;
  return kExitOk;
}

// --- dct -----------------------------------------------------------------------

struct DctFlags {
  bool forward = false;
  bool inverse = false;
  bool one_d = false;
  std::string input = "-";
};

int cmd_dct(const GlobalFlags& g, const DctFlags& f, std::ostream& out, std::istream& in) {
  if (f.forward == f.inverse) throw ConfigError("dct needs exactly one of --forward or --inverse");
  std::string text;
  if (f.input == "-") {
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  } else {
    text = io::read_file(f.input);
  }
  const RealMatrix m = parse_text_matrix(text);
  RealMatrix result(m.rows(), m.cols());
  if (f.one_d) {
    const spectral::DctBasis basis(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (f.forward) {
        basis.forward(m.row(r), result.row(r));
      } else {
        basis.inverse(m.row(r), result.row(r));
      }
    }
  } else {
    result = f.forward ? spectral::dct2d_forward(m) : spectral::dct2d_inverse(m);
  }
  const std::string formatted = format_text_matrix(result);
  if (g.out_dir.empty()) {
    out << formatted;
  } else {
    io::write_file(fs::path(g.out_dir) / (f.forward ? "dct_forward.txt" : "dct_inverse.txt"), formatted);
  }
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Feature extraction, DCT-block CNN training and cross-validation for sleep recordings", "psgdct"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--seed", g.seed, "Seed for generation, shuffling and initialization");
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");

  SynthFlags sf;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--n", sf.n, "Number of records")->capture_default_str();
  synth_cmd->add_option("--duration-h", sf.duration_h, "Record length in hours")->capture_default_str();
  synth_cmd->add_option("--effect", sf.effect, "Label effect strength (0 = null)")->capture_default_str();
  synth_cmd->add_option("--prevalence", sf.prevalence, "Positive-label probability")->capture_default_str();
  synth_cmd->add_flag("--shuffle-labels", sf.shuffle_labels, "Permute labels across records");
  synth_cmd->add_option("--workers", sf.workers, "Parallel record writers")->capture_default_str();

  ExtractFlags ef;
  CLI::App* extract_cmd = app.add_subcommand("extract", "Turn record manifests into feature images");
  extract_cmd->add_option("--records", ef.records, "Directory of record manifests")->required();
  extract_cmd->add_option("--window-min", ef.window_min, "Window length in minutes");
  extract_cmd->add_option("--overlap", ef.overlap, "Window overlap fraction in [0, 1)");
  extract_cmd->add_option("--workers", ef.workers, "Parallel record workers");

  ModelFlags tf;
  CLI::App* train_cmd = app.add_subcommand("train", "Train one model on a feature corpus");
  ModelFlags vf;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Stratified k-fold cross-validation");
  for (auto [cmd, mf] : {std::pair{train_cmd, &tf}, std::pair{eval_cmd, &vf}}) {
    cmd->add_option("--features", mf->features, "Feature corpus directory")->required();
    cmd->add_option("--dct-depth", mf->dct_depth, "DCT block position (3..6 or none; eval takes a list)");
    cmd->add_option("--epochs", mf->epochs, "Maximum training epochs");
    cmd->add_option("--window-min", mf->window_min, "Expected window length of the corpus");
    cmd->add_option("--threshold-mode", mf->threshold_mode, "soft or hard");
    cmd->add_option("--workers", mf->workers, "Parallel fold workers");
  }
  eval_cmd->add_option("--folds", vf.folds, "Number of folds");

  DctFlags df;
  CLI::App* dct_cmd = app.add_subcommand("dct", "Apply the orthonormal DCT to a text matrix");
  dct_cmd->add_flag("--forward", df.forward, "DCT-II");
  dct_cmd->add_flag("--inverse", df.inverse, "DCT-III");
  dct_cmd->add_flag("--1d", df.one_d, "Transform each row instead of the whole matrix");
  dct_cmd->add_option("input", df.input, "Matrix file, '-' for stdin")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "psgdct: " << e.what() << '\n';
    return kExitUsage;
  }

  const Log log(err, g.quiet);
  if (synth_cmd->parsed()) return cmd_synth(g, sf, out, log);
  if (extract_cmd->parsed()) return cmd_extract(g, ef, out, log);
  if (train_cmd->parsed()) return cmd_train(g, tf, out, log);
  if (eval_cmd->parsed()) return cmd_eval(g, vf, out, log);
  return cmd_dct(g, df, out, in);
}

}  // namespace

RealMatrix parse_text_matrix(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t\r");
      const auto e = field.find_last_not_of(" \t\r");
      if (b == std::string::npos) throw ParseError(lineno, "empty field");
      const std::string t = field.substr(b, e - b + 1);
      char* end = nullptr;
      const double v = std::strtod(t.c_str(), &end);
      if (end != t.c_str() + t.size() || !std::isfinite(v)) throw ParseError(lineno, "bad number '" + t + "'");
      row.push_back(v);
    }
    if (line.find_last_not_of(" \t\r") == line.rfind(',')) throw ParseError(lineno, "trailing comma");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(lineno, "expected " + std::to_string(rows.front().size()) + " columns, got " +
                                   std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(lineno, "no matrix rows");
  return RealMatrix::from_rows(rows);
}

std::string format_text_matrix(const RealMatrix& m) {
  double scale = 0.0;
  for (double v : m.values()) scale = std::max(scale, std::abs(v));
  // Round-off residue far below the largest entry prints as an exact zero.
  const double snap = 1e-13 * scale;
  std::string out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = std::abs(m(r, c)) < snap ? 0.0 : m(r, c);
      if (c > 0) out += ',';
      out += io::format_number(v, 17);
    }
    out += '\n';
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err, std::cin);
  } catch (const ConfigError& e) {
    err << "psgdct: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "psgdct: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace psgdct::cli
