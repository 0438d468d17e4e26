#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psgdct/features.h"
#include "psgdct/formats.h"
#include "psgdct/record.h"
#include "psgdct/sigprep.h"
#include "psgdct/train.h"

namespace psgdct {

struct ExtractOptions {
  WindowSpec window;
  // Channel kinds to keep, in record order; empty keeps every channel.
  std::vector<ChannelKind> channels;
  std::size_t workers = 1;
};

// Drops channels whose kind is not selected.
SignalRecord select_channels(const SignalRecord& rec, const std::vector<ChannelKind>& kinds);

// Raw per-window feature rows (kMissing where a value cannot be computed).
// The window count is the smallest across channels. Windows whose channel is
// mostly artifact leave that channel's features missing.
std::vector<std::vector<double>> window_features(const SignalRecord& rec, const WindowSpec& spec,
                                                 const FeatureSchema& schema);

FeatureImage record_feature_image(const SignalRecord& rec, const WindowSpec& spec);

Sample record_to_sample(const SignalRecord& rec, const WindowSpec& spec);

// Reads every manifest in `records_dir`, writes `<id>.features` per record and
// `index.json` into `out_dir`. Records that fail are listed in the index
// errors and skipped; throws Error when none succeed. Output is identical for
// any worker count.
io::FeatureIndex extract_corpus(const std::filesystem::path& records_dir, const std::filesystem::path& out_dir,
                                const ExtractOptions& options);

}  // namespace psgdct
