#include "psgdct/checkpoint.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psgdct/error.h"

namespace psgdct {

using nlohmann::json;

namespace {

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

json config_to_json(const ModelConfig& cfg) {
  json j;
  j["num_blocks"] = cfg.num_blocks;
  j["dct_depth"] = cfg.dct_depth ? json(*cfg.dct_depth) : json(nullptr);
  j["channels_per_block"] = cfg.channels_per_block;
  j["pool_blocks"] = cfg.pool_blocks;
  j["static_dim"] = cfg.static_dim;
  j["threshold_mode"] = to_string(cfg.threshold_mode);
  j["seed"] = cfg.seed;
  j["input_height"] = cfg.input_height;
  j["input_width"] = cfg.input_width;
  j["tau_init"] = cfg.tau_init;
  j["scale_init"] = cfg.scale_init;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.num_blocks = j.at("num_blocks").get<std::size_t>();
  if (j.at("dct_depth").is_null()) {
    cfg.dct_depth.reset();
  } else {
    cfg.dct_depth = j.at("dct_depth").get<std::size_t>();
  }
  cfg.channels_per_block = j.at("channels_per_block").get<std::vector<std::size_t>>();
  cfg.pool_blocks = j.at("pool_blocks").get<std::size_t>();
  cfg.static_dim = j.at("static_dim").get<std::size_t>();
  cfg.threshold_mode = threshold_mode_from_string(j.at("threshold_mode").get<std::string>());
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.input_height = j.at("input_height").get<std::size_t>();
  cfg.input_width = j.at("input_width").get<std::size_t>();
  cfg.tau_init = j.at("tau_init").get<double>();
  cfg.scale_init = j.at("scale_init").get<double>();
  return cfg;
}

}  // namespace

std::string serialize_checkpoint(const ModelCheckpoint& ckpt) {
  json header;
  header["config"] = config_to_json(ckpt.config);
  header["statics"] = {{"mean", ckpt.statics.mean}, {"stddev", ckpt.statics.stddev}};
  header["meta"] = {{"epochs", ckpt.meta.epochs},
                    {"steps", ckpt.meta.steps},
                    {"best_epoch", ckpt.meta.best_epoch},
                    {"final_loss", ckpt.meta.final_loss},
                    {"best_validation", ckpt.meta.best_validation},
                    {"seed", ckpt.meta.seed}};
  const std::string text = header.dump();

  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le(out, kCheckpointMajor, 2);
  put_le(out, kCheckpointMinor, 2);
  put_le(out, text.size(), 4);
  out += text;
  put_le(out, ckpt.parameters.size(), 8);
  for (double p : ckpt.parameters) put_le(out, std::bit_cast<std::uint64_t>(p), 8);
  return out;
}

ModelCheckpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw InvalidCheckpoint("bad magic");
  }
  const auto major = static_cast<std::uint16_t>(get_le(bytes, 8, 2));
  if (major != kCheckpointMajor) {
    throw InvalidCheckpoint("unsupported checkpoint version " + std::to_string(major));
  }
  const std::size_t header_len = get_le(bytes, 12, 4);
  std::size_t pos = 16;
  if (bytes.size() < pos + header_len + 8) throw InvalidCheckpoint("truncated header");

  ModelCheckpoint ckpt;
  try {
    const json header = json::parse(bytes.substr(pos, header_len));
    ckpt.config = config_from_json(header.at("config"));
    ckpt.statics.mean = header.at("statics").at("mean").get<std::vector<double>>();
    ckpt.statics.stddev = header.at("statics").at("stddev").get<std::vector<double>>();
    const json& meta = header.at("meta");
    ckpt.meta.epochs = meta.at("epochs").get<std::size_t>();
    ckpt.meta.steps = meta.at("steps").get<std::size_t>();
    ckpt.meta.best_epoch = meta.at("best_epoch").get<std::size_t>();
    ckpt.meta.final_loss = meta.at("final_loss").get<double>();
    ckpt.meta.best_validation = meta.at("best_validation").get<double>();
    ckpt.meta.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw InvalidCheckpoint(std::string("bad header: ") + e.what());
  } catch (const Error& e) {
    throw InvalidCheckpoint(std::string("bad header: ") + e.what());
  }
  pos += header_len;

  const std::uint64_t count = get_le(bytes, pos, 8);
  pos += 8;
  if (bytes.size() - pos != count * 8) throw InvalidCheckpoint("parameter payload size mismatch");
  ckpt.parameters.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ckpt.parameters[i] = std::bit_cast<double>(get_le(bytes, pos + 8 * i, 8));
  }

  try {
    ckpt.config.validate();
  } catch (const Error& e) {
    throw InvalidCheckpoint(std::string("bad config: ") + e.what());
  }
  if (ckpt.statics.mean.size() != ckpt.config.static_dim || ckpt.statics.stddev.size() != ckpt.config.static_dim) {
    throw InvalidCheckpoint("standardizer does not match static_dim");
  }
  // Builds the model once to check the parameter vector against the layout.
  (void)ckpt.model();
  return ckpt;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidCheckpoint("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace psgdct
