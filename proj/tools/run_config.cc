#include "run_config.h"

#include <sstream>

#include <json.hpp>

#include "psgdct/error.h"

namespace psgdct::cli {

using nlohmann::json;

namespace {

DctDepth depth_from_text(const std::string& raw) {
  std::string t;
  for (char c : raw) {
    if (c != ' ' && c != '\t') t.push_back(c);
  }
  if (t == "none") return std::nullopt;
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos || t.size() > 3) {
    throw ConfigError("invalid DCT depth '" + raw + "' (expected an integer or 'none')");
  }
  return static_cast<std::size_t>(std::stoul(t));
}

DctDepth depth_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) return depth_from_text(j.get<std::string>());
  if (j.is_number_unsigned()) return j.get<std::size_t>();
  throw ConfigError("dct_depth entries must be integers, \"none\" or null");
}

template <typename T>
T read_value(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<DctDepth> parse_dct_depths(const std::string& text) {
  std::vector<DctDepth> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(depth_from_text(part));
  if (out.empty()) throw ConfigError("empty DCT depth list");
  return out;
}

std::string depth_label(DctDepth depth) { return depth ? std::to_string(*depth) : "none"; }

ModelConfig RunConfig::model_for(DctDepth depth) const {
  ModelConfig cfg = model;
  cfg.dct_depth = depth;
  cfg.seed = seed;
  return cfg;
}

void RunConfig::validate() const {
  try {
    window().validate();
    hyper.validate();
    if (dct_depths.empty()) throw ConfigError("no DCT depth given");
    for (const DctDepth& d : dct_depths) model_for(d).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (folds < 2) throw ConfigError("folds must be >= 2");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

RunConfig parse_run_config(const std::string& json_text, RunConfig base) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig& c = base;
  for (const auto& [key, v] : root.items()) {
    if (key == "window_min") {
      c.window_min = read_value<double>(v, key);
    } else if (key == "overlap") {
      c.overlap = read_value<double>(v, key);
    } else if (key == "channels") {
      c.channels.clear();
      for (const std::string& name : read_value<std::vector<std::string>>(v, key)) {
        try {
          c.channels.push_back(channel_kind_from_string(name));
        } catch (const Error& e) {
          throw ConfigError(e.what());
        }
      }
    } else if (key == "num_blocks") {
      c.model.num_blocks = read_value<std::size_t>(v, key);
    } else if (key == "channels_per_block") {
      c.model.channels_per_block = read_value<std::vector<std::size_t>>(v, key);
    } else if (key == "pool_blocks") {
      c.model.pool_blocks = read_value<std::size_t>(v, key);
    } else if (key == "threshold_mode") {
      try {
        c.model.threshold_mode = threshold_mode_from_string(read_value<std::string>(v, key));
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "input_height") {
      c.model.input_height = read_value<std::size_t>(v, key);
    } else if (key == "input_width") {
      c.model.input_width = read_value<std::size_t>(v, key);
    } else if (key == "tau_init") {
      c.model.tau_init = read_value<double>(v, key);
    } else if (key == "scale_init") {
      c.model.scale_init = read_value<double>(v, key);
    } else if (key == "dct_depth") {
      c.dct_depths.clear();
      if (v.is_array()) {
        for (const json& d : v) c.dct_depths.push_back(depth_from_json(d));
      } else {
        c.dct_depths.push_back(depth_from_json(v));
      }
    } else if (key == "learning_rate") {
      c.hyper.learning_rate = read_value<double>(v, key);
    } else if (key == "beta1") {
      c.hyper.beta1 = read_value<double>(v, key);
    } else if (key == "beta2") {
      c.hyper.beta2 = read_value<double>(v, key);
    } else if (key == "epsilon") {
      c.hyper.epsilon = read_value<double>(v, key);
    } else if (key == "batch_size") {
      c.hyper.batch_size = read_value<std::size_t>(v, key);
    } else if (key == "max_epochs") {
      c.hyper.max_epochs = read_value<std::size_t>(v, key);
    } else if (key == "patience") {
      c.hyper.patience = read_value<std::size_t>(v, key);
    } else if (key == "validation_fraction") {
      c.hyper.validation_fraction = read_value<double>(v, key);
    } else if (key == "class_weighting") {
      c.hyper.class_weighting = read_value<bool>(v, key);
    } else if (key == "folds") {
      c.folds = read_value<std::size_t>(v, key);
    } else if (key == "seed") {
      c.seed = read_value<std::uint64_t>(v, key);
    } else if (key == "workers") {
      c.workers = read_value<std::size_t>(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace psgdct::cli
