#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psgdct/model.h"
#include "psgdct/train.h"

namespace psgdct {

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of_record;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Round-robin assignment of each class's seeded permutation; the second class
// continues where the first stopped so fold sizes differ by at most one.
FoldAssignment stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

// Exact Mann-Whitney AUC over all positive/negative pairs, ties counting 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

struct FoldMetrics {
  double accuracy = 0.0;
  double auc = 0.0;
  std::size_t n_test = 0;
  std::size_t n_pos = 0;
  std::size_t epochs = 0;
};

struct FoldReport {
  std::vector<FoldMetrics> folds;
  double mean_accuracy = 0.0;
  double mean_auc = 0.0;
  double std_auc = 0.0;  // population standard deviation over folds
  std::vector<double> out_of_fold_scores;

  void finalize();
};

struct CrossValidationOptions {
  std::size_t k = 10;
  std::uint64_t seed = 42;
  // Folds run on up to this many threads; results do not depend on it.
  std::size_t workers = 1;
};

// Trains one model per fold on the other k-1 folds and scores the held-out
// fold. The model seed for fold f is derived from (options.seed, f).
FoldReport cross_validate(const std::vector<Sample>& data, const ModelConfig& cfg,
                          const TrainHyper& hyper, const CrossValidationOptions& options);

}  // namespace psgdct
