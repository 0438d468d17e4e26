#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "psgdct/error.h"
#include "psgdct/eval.h"

namespace psgdct {
namespace {

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  // SplitMix64 finalizer over (seed, fold).
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (fold + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

FoldReport cross_validate(const std::vector<Sample>& data, const ModelConfig& cfg,
                          const TrainHyper& hyper, const CrossValidationOptions& options) {
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const Sample& s : data) labels.push_back(s.label);
  const FoldAssignment folds = stratified_kfold(labels, options.k, options.seed);

  FoldReport report;
  report.folds.resize(options.k);
  report.out_of_fold_scores.assign(data.size(), 0.0);
  std::vector<std::exception_ptr> errors(options.k);

  auto run_fold = [&](std::size_t f) {
    try {
      std::vector<Sample> train_set;
      for (std::size_t i : folds.train_indices(f)) train_set.push_back(data[i]);
      std::vector<Sample> test_set;
      std::vector<int> test_labels;
      const std::vector<std::size_t> test_idx = folds.test_indices(f);
      for (std::size_t i : test_idx) {
        test_set.push_back(data[i]);
        test_labels.push_back(data[i].label);
      }
      ModelConfig fold_cfg = cfg;
      fold_cfg.seed = fold_seed(cfg.seed, f);
      const TrainResult trained = train(train_set, fold_cfg, hyper);
      const std::vector<double> scores = predict(trained.checkpoint, test_set);

      FoldMetrics& m = report.folds[f];
      m.accuracy = accuracy(scores, test_labels);
      m.auc = roc_auc(scores, test_labels);
      m.n_test = test_set.size();
      m.n_pos = static_cast<std::size_t>(std::count(test_labels.begin(), test_labels.end(), 1));
      m.epochs = trained.checkpoint.meta.epochs;
      for (std::size_t j = 0; j < test_idx.size(); ++j) report.out_of_fold_scores[test_idx[j]] = scores[j];
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, options.k);
  if (workers == 1) {
    for (std::size_t f = 0; f < options.k; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < options.k; f = next++) run_fold(f);
      });
    }
  }

  for (std::size_t f = 0; f < options.k; ++f) {
    if (!errors[f]) continue;
    try {
      std::rethrow_exception(errors[f]);
    } catch (const std::exception& e) {
      throw FoldFailure(f, e.what());
    }
  }
  report.finalize();
  return report;
}

}  // namespace psgdct
