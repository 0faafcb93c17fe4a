#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mmfnd::pipeline {

inline constexpr std::string_view kToolVersion = "mmfnd 0.1.0";

// One stage of a declarative run config. Input values are either paths to
// external files (relative ones resolve against the config's directory) or
// "<stage>:<output>" references to an earlier stage's artifact.
struct StageConfig {
  std::string name;
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
  std::map<std::string, std::vector<std::string>> inputs;
};

struct RunConfig {
  std::filesystem::path workspace;
  std::filesystem::path base_dir;  // anchor for relative external inputs
  std::uint64_t seed = 0;
  std::vector<StageConfig> stages;

  // Parses and validates structure: unique stage names, registered kinds,
  // well-formed input blocks. MMFND_WORKSPACE overrides the workspace.
  static RunConfig load(const std::filesystem::path& config_path);
  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir);
};

struct ArtifactRef {
  std::string ref;     // as referenced: external path or "stage:output"
  std::string sha256;  // empty for unhashed artifacts
};

struct StageResult {
  std::string name;
  std::string kind;
  std::string key;  // content-address: hash of kind+params+seed+input hashes
  std::uint64_t seed = 0;
  bool cached = false;
  std::map<std::string, std::vector<ArtifactRef>> inputs;
  std::map<std::string, ArtifactRef> outputs;  // ref = workspace-relative path
  std::filesystem::path out_dir;
};

struct RunResult {
  std::filesystem::path workspace;
  std::filesystem::path manifest_path;  // ws/run.json
  std::vector<StageResult> stages;

  const StageResult& stage(const std::string& name) const;
  // Absolute path of a "<stage>:<output>" artifact.
  std::filesystem::path artifact(const std::string& ref) const;
};

// Executes the stages in order. A stage whose content key already has a
// completed workspace entry is skipped and its artifacts reused. Writes a
// deterministic run manifest (no timestamps, no machine paths) to
// ws/run.json and refreshes the human-readable per-stage symlinks.
// Throws ConfigInvalidError for bad references or missing external inputs,
// StageFailedError wrapping the failing stage's error.
RunResult run(const RunConfig& config);

// Resolved DAG listing without executing anything.
std::string dry_run_text(const RunConfig& config);

// SHA-256 of a file, or of a directory's sorted (relpath, file hash) listing.
std::string hash_path(const std::filesystem::path& path);

}  // namespace mmfnd::pipeline
