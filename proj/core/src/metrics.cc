#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

#include "psgdct/error.h"
#include "psgdct/eval.h"

namespace psgdct {

std::vector<std::size_t> FoldAssignment::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_record.size(); ++i) {
    if (fold_of_record[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_record.size(); ++i) {
    if (fold_of_record[i] != fold) out.push_back(i);
  }
  return out;
}

FoldAssignment stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidParameter("k must be >= 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidInput("labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw StratificationError("class " + std::to_string(c) + " has " +
                                std::to_string(by_class[c].size()) + " members, need at least k=" +
                                std::to_string(k));
    }
  }
  std::mt19937_64 rng(seed);
  FoldAssignment a;
  a.k = k;
  a.fold_of_record.assign(labels.size(), 0);
  std::size_t next = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t idx : members) {
      a.fold_of_record[idx] = next;
      next = (next + 1) % k;
    }
  }
  return a;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney U, accumulated in integers so the result is exact.
  std::int64_t twice_u = 0;
  std::int64_t negatives_below = 0;
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::int64_t tie_pos = 0;
    std::int64_t tie_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tie_pos : tie_neg) += 1;
      ++j;
    }
    twice_u += tie_pos * (2 * negatives_below + tie_neg);
    negatives_below += tie_neg;
    n_pos += tie_pos;
    n_neg += tie_neg;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("AUC needs both classes present");
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw InvalidInput("scores and labels differ in length");
  if (scores.empty()) throw UndefinedMetric("accuracy of an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] >= threshold ? 1 : 0;
    if (pred == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

void FoldReport::finalize() {
  const double n = static_cast<double>(folds.size());
  mean_accuracy = 0.0;
  mean_auc = 0.0;
  for (const FoldMetrics& f : folds) {
    mean_accuracy += f.accuracy;
    mean_auc += f.auc;
  }
  mean_accuracy /= n;
  mean_auc /= n;
  double var = 0.0;
  for (const FoldMetrics& f : folds) var += (f.auc - mean_auc) * (f.auc - mean_auc);
  std_auc = std::sqrt(var / n);
}

}  // namespace psgdct
