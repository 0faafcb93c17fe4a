#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfnd/encode/encoder.hpp"

namespace mmfnd::pipeline {

// One artifact a stage produced, relative to its output directory. Artifacts
// carrying wall-clock measurements opt out of hashing so run manifests stay
// reproducible.
struct StageOutput {
  std::string name;
  std::string relpath;
  bool hashed = true;
};

// Everything a stage sees: its parameter block, resolved input paths (an
// input key may carry several files), a fresh output directory, and the seed
// fanned out from the global one.
struct StageContext {
  nlohmann::json params = nlohmann::json::object();
  std::map<std::string, std::vector<std::filesystem::path>> inputs;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
};

using StageFn = std::function<std::vector<StageOutput>(const StageContext&)>;

// kind -> implementation. Kinds: fixture, ingest, manipulate, vnme, encode,
// train, predict, evaluate, grid, ensemble.
const std::map<std::string, StageFn>& stage_registry();

// The single input file registered under key; ConfigInvalidError when the
// key is absent or holds more than one path.
const std::filesystem::path& require_input(const StageContext& ctx, const std::string& key);
// All input files under key, possibly empty when optional.
std::vector<std::filesystem::path> input_list(const StageContext& ctx,
                                              const std::string& key);
bool has_input(const StageContext& ctx, const std::string& key);

// "mock-text-24" / "mock-image-24" build desk-scale mock specs; any other
// name must be a registered pretrained preset.
encode::EncoderSpec parse_encoder_spec(const std::string& name);

}  // namespace mmfnd::pipeline
