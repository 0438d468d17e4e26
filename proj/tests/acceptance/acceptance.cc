// Acceptance harness: one PASS/FAIL line per criterion, exit code 1 if any
// criterion fails. Tolerances are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.h"
#include "network_fixtures.h"
#include "oracles.h"
#include "psgdct/eval.h"
#include "psgdct/features.h"
#include "psgdct/formats.h"
#include "psgdct/layers.h"
#include "psgdct/pipeline.h"
#include "psgdct/spectral.h"
#include "psgdct/synth.h"

namespace {

using namespace psgdct;
namespace fs = std::filesystem;

constexpr double kOrthoTol = 1e-10;
constexpr double kRoundTripTol = 1e-9;
constexpr double kHrvTol = 1e-9;
constexpr double kGradTol = 1e-3;
constexpr double kGradEps = 1e-4;
constexpr std::size_t kGradMinParams = 200;
constexpr double kIdentityTol = 1e-9;
constexpr double kSeparableAucMin = 0.90;
constexpr double kNullAucLo = 0.40;
constexpr double kNullAucHi = 0.60;

constexpr double kTransformBudgetS = 10.0;
constexpr double kHrvBudgetS = 5.0;
constexpr double kGradBudgetS = 60.0;
constexpr double kEndToEndBudgetS = 15.0 * 60.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("psgdct_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the CLI in-process; throws with its stderr on a nonzero exit.
void cli_ok(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) {
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    throw std::runtime_error("psgdct " + joined + "exited " + std::to_string(code) + ": " + err.str());
  }
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
  }
  return files;
}

// ---------------------------------------------------------------------------

Outcome transform_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double ortho = 0.0;
  for (std::size_t n = 1; n <= 64; ++n) {
    const spectral::DctBasis c(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += c(k, i) * c(k, j);
        ortho = std::max(ortho, std::abs(dot - (i == j ? 1.0 : 0.0)));
      }
    }
  }

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> side(1, 64);
  std::normal_distribution<double> g(0.0, 1.0);
  double round_trip = 0.0, parseval = 0.0, oracle_gap = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t h = side(rng), w = side(rng);
    RealMatrix m(h, w);
    double energy = 0.0;
    for (double& v : m.values()) {
      v = g(rng);
      energy += v * v;
    }
    const RealMatrix f = spectral::dct2d_forward(m);
    const RealMatrix back = spectral::dct2d_inverse(f);
    double fe = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      round_trip = std::max(round_trip, std::abs(back.values()[i] - m.values()[i]));
      fe += f.values()[i] * f.values()[i];
    }
    parseval = std::max(parseval, std::abs(fe - energy) / energy);
    // Double-sum oracle on the smaller shapes; it is O(h^2 w^2).
    if (h * w <= 256) {
      const auto ref = oracle::dct2({m.values().begin(), m.values().end()}, h, w);
      for (std::size_t i = 0; i < ref.size(); ++i) oracle_gap = std::max(oracle_gap, std::abs(ref[i] - f.values()[i]));
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = ortho < kOrthoTol && round_trip < kRoundTripTol && parseval < kRoundTripTol &&
           oracle_gap < kRoundTripTol && secs < kTransformBudgetS;
  o.detail = "ortho " + fmt(ortho) + ", roundtrip " + fmt(round_trip) + ", parseval " + fmt(parseval) +
             ", naive oracle gap " + fmt(oracle_gap) + " (no fast path), " + fmt(secs, 3) + " s";
  return o;
}

Outcome threshold_semantics() {
  // Dyadic grid: every subtraction below is exact in binary floating point.
  std::size_t violations = 0, checked = 0;
  for (int k = -1024; k <= 1024; k += 3) {
    const double x = k / 64.0;
    for (int m = 0; m <= 256; m += 7) {
      const double tau = m / 64.0;
      const double s = spectral::soft_threshold(x, tau);
      const double h = spectral::hard_threshold(x, tau);
      violations += spectral::soft_threshold(-x, tau) != -s;
      violations += spectral::hard_threshold(-x, tau) != -h;
      violations += std::abs(s) != std::max(std::abs(x) - tau, 0.0);
      violations += h != (std::abs(x) > tau ? x : 0.0);
      for (int j = -1024; j <= 1024; j += 61) {
        const double y = j / 64.0;
        violations += std::abs(s - spectral::soft_threshold(y, tau)) > std::abs(x - y);
      }
      ++checked;
    }
    violations += spectral::soft_threshold(x, 0.0) != x;
    violations += spectral::hard_threshold(x, 0.0) != (x == 0.0 ? 0.0 : x);
  }

  // Negative coefficients: ReLU zeroes all of them; both thresholds keep every
  // one whose magnitude exceeds tau.
  const double tau = 0.5;
  std::size_t negatives = 0, relu_kept = 0, soft_kept = 0, hard_kept = 0, above_tau = 0;
  for (int k = 1; k <= 400; ++k) {
    const double x = -k / 64.0;
    ++negatives;
    above_tau += -x > tau;
    relu_kept += std::max(x, 0.0) != 0.0;
    soft_kept += spectral::soft_threshold(x, tau) < 0.0;
    hard_kept += spectral::hard_threshold(x, tau) == x && x < -tau;
  }
  Outcome o;
  o.pass = violations == 0 && relu_kept == 0 && soft_kept == above_tau && hard_kept == above_tau;
  o.detail = std::to_string(checked) + " (x, tau) cases, " + std::to_string(violations) + " violations; ReLU zeroed " +
             std::to_string(negatives - relu_kept) + "/" + std::to_string(negatives) + " negatives, soft/hard kept " +
             std::to_string(soft_kept) + "/" + std::to_string(hard_kept) + " of " + std::to_string(above_tau) +
             " with |x| > tau";
  return o;
}

Outcome hrv_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const HrvMetrics ex = hrv_metrics(RrSequence{{800, 810, 790, 805}});
  const bool example = std::abs(ex.sdnn - 7.395) < 5e-4 && std::abs(ex.rmssd - 15.546) < 5e-4;

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(0, 400);
  std::normal_distribution<double> step(0.0, 40.0);
  double worst = 0.0;
  std::size_t mismatched_missing = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> rr(static_cast<std::size_t>(len(rng)));
    double v = 850.0;
    for (double& r : rr) {
      v = std::clamp(v + step(rng), 400.0, 1500.0);
      r = v;
    }
    const HrvMetrics got = hrv_metrics(RrSequence{rr});
    const oracle::Hrv want = oracle::hrv(rr);
    const std::pair<double, double> pairs[] = {
        {got.mean_rr, want.mean}, {got.sdnn, want.sdnn}, {got.rmssd, want.rmssd}, {got.pnn50, want.pnn50}};
    for (auto [a, b] : pairs) {
      if (std::isnan(a) != std::isnan(b)) {
        ++mismatched_missing;
      } else if (!std::isnan(a)) {
        worst = std::max(worst, std::abs(a - b));
      }
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = example && worst < kHrvTol && mismatched_missing == 0 && secs < kHrvBudgetS;
  o.detail = "example SDNN " + fmt(ex.sdnn, 7) + " RMSSD " + fmt(ex.rmssd, 7) + ", max gap " + fmt(worst) +
             " over 1000 sequences, " + fmt(secs, 3) + " s";
  return o;
}

Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  for (ThresholdMode mode : {ThresholdMode::kSoft, ThresholdMode::kHard}) {
    const fixture::GradCheck r = fixture::finite_difference_check(fixture::toy_config(mode), 100, kGradEps, 11);
    const bool ok = r.max_rel_error < kGradTol && r.checked >= kGradMinParams && r.conv > 0 && r.scale > 0 &&
                    r.tau > 0 && r.head > 0;
    o.pass = o.pass && ok;
    o.detail += to_string(mode) + ": " + std::to_string(r.checked) + " params (conv " + std::to_string(r.conv) +
                ", affine " + std::to_string(r.affine) + ", scale " + std::to_string(r.scale) + ", tau " +
                std::to_string(r.tau) + ", fc " + std::to_string(r.head) + ") max rel err " +
                fmt(r.max_rel_error) + "; ";
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < kGradBudgetS;
  o.detail += fmt(secs, 3) + " s";
  return o;
}

Outcome dct_block_identity() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  std::size_t shapes = 0;
  for (std::size_t h = 1; h <= 32; ++h) {
    for (std::size_t w = 1; w <= 32; ++w) {
      Tensor x(Shape{2, h, w});
      for (double& v : x.values()) v = g(rng);
      const nn::DctPlan plan(h, w);
      const std::vector<double> scale(x.numel(), 1.0), tau(2, 0.0);
      const Tensor y = nn::dct_block_forward(x, {scale, tau, ThresholdMode::kSoft}, plan);
      for (std::size_t i = 0; i < x.numel(); ++i) worst = std::max(worst, std::abs(y.values()[i] - x.values()[i]));
      ++shapes;
    }
  }
  return {worst < kIdentityTol, std::to_string(shapes) + " shapes up to 32x32, max deviation " + fmt(worst)};
}

// Synthetic corpus held in memory: the same records `psgdct synth` writes
// (channels are generated at float precision) turned into samples the way
// `psgdct extract` does.
std::vector<Sample> synth_samples(const synth::SynthConfig& cfg, const WindowSpec& spec) {
  std::vector<Sample> out;
  out.reserve(cfg.n_records);
  for (std::size_t i = 0; i < cfg.n_records; ++i) {
    out.push_back(record_to_sample(synth::generate_record(cfg, i).record, spec));
  }
  return out;
}

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  synth::SynthConfig sc;  // n = 200, 2 h, effect 1, seed 42
  std::vector<Sample> data = synth_samples(sc, WindowSpec{10.0, 0.0});
  const double extract_s = seconds_since(t0);

  ModelConfig mc;
  mc.dct_depth = 3;
  mc.seed = 42;
  CrossValidationOptions cv;
  cv.k = 10;
  cv.seed = 42;
  const FoldReport sep = cross_validate(data, mc, TrainHyper{}, cv);

  std::vector<int> labels;
  for (const Sample& s : data) labels.push_back(s.label);
  const std::vector<int> shuffled = synth::shuffled_labels(labels, sc.seed);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].label = shuffled[i];
  const FoldReport null = cross_validate(data, mc, TrainHyper{}, cv);

  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = sep.mean_auc >= kSeparableAucMin && null.mean_auc >= kNullAucLo && null.mean_auc <= kNullAucHi &&
           secs < kEndToEndBudgetS;
  o.detail = "separable mean AUC " + fmt(sep.mean_auc) + " (acc " + fmt(sep.mean_accuracy) + "), null mean AUC " +
             fmt(null.mean_auc) + ", " + fmt(secs, 4) + " s incl. " + fmt(extract_s, 3) + " s feature extraction";
  return o;
}

Outcome depth_sweep() {
  const fs::path root = scratch("sweep");
  const std::string records = (root / "records").string(), features = (root / "features").string(),
                    eval_dir = (root / "eval").string();
  cli_ok({"--seed", "42", "--out", records, "--quiet", "synth", "--n", "40", "--duration-h", "1"});
  cli_ok({"--out", features, "--quiet", "extract", "--records", records});
  cli_ok({"--seed", "42", "--out", eval_dir, "--quiet", "eval", "--features", features, "--dct-depth",
          "3,4,5,6,none", "--folds", "5"});

  const auto sweep = nlohmann::json::parse(io::read_file(root / "eval" / "sweep.json"));
  const std::string table = io::read_file(root / "eval" / "sweep.txt");
  std::vector<std::string> depths;
  double max_delta = 0.0;
  for (const auto& row : sweep.at("rows")) {
    const auto& d = row.at("dct_depth");
    depths.push_back(d.is_string() ? d.get<std::string>() : d.dump());
    if (row.contains("delta_auc")) {
      max_delta = std::max({max_delta, std::abs(row.at("delta_auc").get<double>()),
                            std::abs(row.at("delta_accuracy").get<double>())});
    }
  }
  const std::vector<std::string> want = {"3", "4", "5", "6", "none"};
  bool files = true;
  for (const char* d : {"3", "4", "5", "6", "none"}) files = files && fs::exists(root / "eval" / ("report_dct" + std::string(d) + ".json"));
  fs::remove_all(root);

  Outcome o;
  o.pass = depths == want && files && max_delta > 0.0 && table.find("delta_auc") != std::string::npos;
  std::string joined;
  for (const auto& d : depths) joined += d + " ";
  o.detail = "depths { " + joined + "}, largest |delta| vs none " + fmt(max_delta) + " (40 records x 1 h, 5 folds)";
  return o;
}

Outcome determinism() {
  std::map<std::string, std::string> runs[2];
  for (int r = 0; r < 2; ++r) {
    const fs::path root = scratch("det" + std::to_string(r));
    const std::string records = (root / "records").string(), features = (root / "features").string();
    cli_ok({"--seed", "7", "--out", records, "--quiet", "synth", "--n", "24", "--duration-h", "1"});
    cli_ok({"--out", features, "--quiet", "extract", "--records", records});
    cli_ok({"--seed", "7", "--out", (root / "train").string(), "--quiet", "train", "--features", features,
            "--dct-depth", "3", "--epochs", "10"});
    cli_ok({"--seed", "7", "--out", (root / "eval").string(), "--quiet", "eval", "--features", features,
            "--dct-depth", "3", "--folds", "4", "--epochs", "10", "--workers", r == 0 ? "1" : "2"});
    for (const char* sub : {"features", "train", "eval"}) {
      for (auto& [name, bytes] : tree(root / sub)) runs[r][std::string(sub) + "/" + name] = std::move(bytes);
    }
    fs::remove_all(root);
  }
  std::size_t differing = 0;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    differing += it == runs[1].end() || it->second != bytes;
  }
  const bool has_all = runs[0].count("train/model.ckpt") && runs[0].count("eval/report.json") &&
                       runs[0].count("features/index.json");
  Outcome o;
  o.pass = has_all && differing == 0 && runs[0].size() == runs[1].size();
  o.detail = std::to_string(runs[0].size()) + " files compared (features, checkpoint, reports), " +
             std::to_string(differing) + " differ; second run used 2 fold workers";
  return o;
}

Outcome auc_exactness() {
  std::mt19937_64 rng(3);
  std::size_t mismatches = 0, trials = 0;
  for (std::size_t n = 2; n <= 200; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      // Coarse score grid on most trials so ties are frequent.
      const int levels = rep == 2 ? 1000000 : 5 + static_cast<int>(n % 17);
      std::uniform_int_distribution<int> bucket(0, levels);
      std::vector<double> scores(n);
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        scores[i] = static_cast<double>(bucket(rng)) / levels;
        labels[i] = static_cast<int>(rng() & 1U);
      }
      labels[0] = 0;
      labels[1] = 1;
      mismatches += roc_auc(scores, labels) != oracle::auc(scores, labels);
      ++trials;
    }
  }
  const bool example =
      roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == 0.75 &&
      roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{0, 1, 0, 1}) == 0.5;
  return {mismatches == 0 && example,
          std::to_string(trials) + " trials, n = 2..200, " + std::to_string(mismatches) + " inexact"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"transform-correctness", transform_correctness},
      {"threshold-semantics", threshold_semantics},
      {"hrv-oracle", hrv_oracle},
      {"gradient-fidelity", gradient_fidelity},
      {"dct-block-identity", dct_block_identity},
      {"end-to-end-learning", end_to_end},
      {"depth-sweep", depth_sweep},
      {"determinism", determinism},
      {"auc-exactness", auc_exactness},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
