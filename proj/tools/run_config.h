#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psgdct/model.h"
#include "psgdct/pipeline.h"
#include "psgdct/train.h"

namespace psgdct::cli {

using DctDepth = std::optional<std::size_t>;

// Everything a run needs. Config-file keys are the field names below, with
// model and hyperparameter fields flattened to the top level.
struct RunConfig {
  double window_min = 10.0;
  double overlap = 0.0;
  std::vector<ChannelKind> channels;  // empty = every channel in the record
  ModelConfig model;
  // More than one entry turns `eval` into a depth sweep.
  std::vector<DctDepth> dct_depths{DctDepth{6}};
  TrainHyper hyper;
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  std::size_t workers = 1;

  WindowSpec window() const { return {window_min, overlap}; }
  // Model config for one depth, seeded from `seed`.
  ModelConfig model_for(DctDepth depth) const;
  // Throws ConfigError.
  void validate() const;
};

// Parses JSON text; unknown keys and ill-typed values raise ConfigError.
RunConfig parse_run_config(const std::string& json_text, RunConfig base = {});

// "3", "none", or a comma list such as "3,4,5,6,none".
std::vector<DctDepth> parse_dct_depths(const std::string& text);
std::string depth_label(DctDepth depth);

}  // namespace psgdct::cli
