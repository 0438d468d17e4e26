#pragma once

#include <string>
#include <vector>

#include "psgdct/features.h"
#include "psgdct/sigprep.h"

namespace psgdct {

// One subject: multi-channel recording, scored events, covariates and label.
struct SignalRecord {
  std::string id;
  int label = 0;
  StaticFeatures statics;
  std::vector<ChannelSignal> channels;
  std::vector<EventAnnotation> events;

  std::vector<ChannelKind> channel_kinds() const {
    std::vector<ChannelKind> kinds;
    for (const auto& c : channels) kinds.push_back(c.kind);
    return kinds;
  }
};

}  // namespace psgdct
