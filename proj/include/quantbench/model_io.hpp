#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "quantbench/errors.hpp"
#include "quantbench/model.hpp"
#include "quantbench/train.hpp"

namespace quantbench {

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("model file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw DataError("model file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace detail

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Flat binary model file: 'QBNN' magic, version, the spec fields, then
// every parameter matrix in canonical traversal order as row-major 64-bit
// little-endian doubles.
inline void save_model(const ModelSpec& spec, const ModelParams& params,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path.string() + "'");
  out.write("QBNN", 4);
  detail::put_u32(out, kModelFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(spec.architecture));
  detail::put_u32(out, static_cast<std::uint32_t>(spec.layers));
  detail::put_u32(out, static_cast<std::uint32_t>(spec.units));
  detail::put_u32(out, static_cast<std::uint32_t>(spec.window));
  detail::put_u32(out, static_cast<std::uint32_t>(spec.horizon));
  detail::put_u32(out, static_cast<std::uint32_t>(spec.features));
  detail::put_f64(out, spec.dropout_rate);
  detail::put_u64(out, spec.seed);

  auto mats = collect_matrices(params);
  detail::put_u32(out, static_cast<std::uint32_t>(mats.size()));
  for (const Matrix* m : mats) {
    detail::put_u32(out, static_cast<std::uint32_t>(m->rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m->cols()));
    for (double v : m->data()) detail::put_f64(out, v);
  }
  if (!out) throw DataError("write failed for model file '" + path.string() + "'");
}

struct LoadedModel {
  ModelSpec spec;
  ModelParams params;
};

inline LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path.string() + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "QBNN") {
    throw DataError("'" + path.string() + "' is not a model file (bad magic)");
  }
  const std::uint32_t version = detail::get_u32(in);
  if (version != kModelFormatVersion) {
    throw DataError("unsupported model format version " + std::to_string(version));
  }

  LoadedModel loaded;
  const std::uint32_t arch = detail::get_u32(in);
  if (arch > 3) throw DataError("model file has unknown architecture id");
  loaded.spec.architecture = static_cast<Architecture>(arch);
  loaded.spec.layers = detail::get_u32(in);
  loaded.spec.units = detail::get_u32(in);
  loaded.spec.window = detail::get_u32(in);
  loaded.spec.horizon = detail::get_u32(in);
  loaded.spec.features = detail::get_u32(in);
  loaded.spec.dropout_rate = detail::get_f64(in);
  loaded.spec.seed = detail::get_u64(in);
  loaded.spec.validate();

  // Allocate the parameter structure from the spec, then require the file
  // to match it shape for shape.
  Rng rng(0);
  loaded.params = init_params(loaded.spec, rng);
  auto mats = collect_matrices(loaded.params);
  const std::uint32_t count = detail::get_u32(in);
  if (count != mats.size()) {
    throw DataError("model file matrix count does not match its spec");
  }
  for (Matrix* m : mats) {
    const std::uint32_t rows = detail::get_u32(in);
    const std::uint32_t cols = detail::get_u32(in);
    if (rows != m->rows() || cols != m->cols()) {
      throw DataError("model file matrix shape does not match its spec");
    }
    for (double& v : m->data()) v = detail::get_f64(in);
  }
  return loaded;
}

// ---------------------------------------------------------------------------
// JSON round trip for ModelSpec and TrainConfig
// ---------------------------------------------------------------------------

inline nlohmann::json spec_to_json(const ModelSpec& spec) {
  return nlohmann::json{{"architecture", to_string(spec.architecture)},
                        {"layers", spec.layers},
                        {"units", spec.units},
                        {"dropout_rate", spec.dropout_rate},
                        {"window", spec.window},
                        {"horizon", spec.horizon},
                        {"features", spec.features},
                        {"seed", spec.seed}};
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  try {
    if (j.contains("architecture")) {
      spec.architecture = architecture_from_string(j.at("architecture").get<std::string>());
    }
    if (j.contains("layers")) spec.layers = j.at("layers").get<std::size_t>();
    if (j.contains("units")) spec.units = j.at("units").get<std::size_t>();
    if (j.contains("dropout_rate")) spec.dropout_rate = j.at("dropout_rate").get<double>();
    if (j.contains("window")) spec.window = j.at("window").get<std::size_t>();
    if (j.contains("horizon")) spec.horizon = j.at("horizon").get<std::size_t>();
    if (j.contains("features")) spec.features = j.at("features").get<std::size_t>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

inline nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return nlohmann::json{{"epochs", cfg.epochs},
                        {"batch_size", cfg.batch_size},
                        {"learning_rate", cfg.learning_rate},
                        {"beta1", cfg.beta1},
                        {"beta2", cfg.beta2},
                        {"epsilon", cfg.epsilon},
                        {"teacher_forcing", cfg.teacher_forcing},
                        {"seed", cfg.seed},
                        {"shuffle_each_epoch", cfg.shuffle_each_epoch}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  try {
    if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("beta1")) cfg.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) cfg.beta2 = j.at("beta2").get<double>();
    if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
    if (j.contains("teacher_forcing")) cfg.teacher_forcing = j.at("teacher_forcing").get<bool>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("shuffle_each_epoch")) {
      cfg.shuffle_each_epoch = j.at("shuffle_each_epoch").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace quantbench
