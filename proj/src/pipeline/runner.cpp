#include "mmfnd/pipeline/runner.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"
#include "mmfnd/pipeline/stages.hpp"

namespace mmfnd::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// "<stage>:<output>" when the prefix names a stage; plain paths otherwise.
struct ParsedRef {
  bool is_stage_ref = false;
  std::string stage;
  std::string output;
};

ParsedRef parse_ref(const std::string& ref, const std::set<std::string>& stage_names) {
  const auto colon = ref.find(':');
  if (colon != std::string::npos && stage_names.count(ref.substr(0, colon))) {
    return {true, ref.substr(0, colon), ref.substr(colon + 1)};
  }
  return {};
}

std::vector<std::string> ref_list(const json& value, const std::string& where) {
  std::vector<std::string> refs;
  if (value.is_string()) {
    refs.push_back(value.get<std::string>());
  } else if (value.is_array()) {
    for (const auto& item : value) {
      if (!item.is_string()) {
        throw ConfigInvalidError(where + ": input entries must be strings");
      }
      refs.push_back(item.get<std::string>());
    }
  } else {
    throw ConfigInvalidError(where + ": inputs must be strings or string arrays");
  }
  for (const auto& r : refs) {
    if (r.empty()) throw ConfigInvalidError(where + ": empty input reference");
  }
  return refs;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EncodingError("cannot write " + path.string());
  out << content;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  RunConfig config;
  config.base_dir = base_dir;
  try {
    config.workspace = j.at("workspace").get<std::string>();
    config.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ConfigInvalidError(std::string("run config: ") + e.what());
  }
  if (const char* env = std::getenv("MMFND_WORKSPACE"); env && *env) {
    config.workspace = env;
  }
  if (config.workspace.is_relative()) config.workspace = base_dir / config.workspace;

  if (!j.contains("stages") || !j.at("stages").is_array() || j.at("stages").empty()) {
    throw ConfigInvalidError("run config: 'stages' must be a non-empty array");
  }
  std::set<std::string> seen;
  for (const auto& js : j.at("stages")) {
    StageConfig stage;
    try {
      stage.name = js.at("name").get<std::string>();
      stage.kind = js.at("kind").get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigInvalidError(std::string("stage block: ") + e.what());
    }
    if (stage.name.empty() || stage.name.find('/') != std::string::npos ||
        stage.name.find(':') != std::string::npos) {
      throw ConfigInvalidError("bad stage name: '" + stage.name + "'");
    }
    if (!seen.insert(stage.name).second) {
      throw ConfigInvalidError("duplicate stage name: " + stage.name);
    }
    if (!stage_registry().count(stage.kind)) {
      throw ConfigInvalidError("stage " + stage.name + ": unknown kind '" +
                               stage.kind + "'");
    }
    if (js.contains("params")) {
      if (!js.at("params").is_object()) {
        throw ConfigInvalidError("stage " + stage.name + ": params must be an object");
      }
      stage.params = js.at("params");
    }
    if (js.contains("inputs")) {
      if (!js.at("inputs").is_object()) {
        throw ConfigInvalidError("stage " + stage.name + ": inputs must be an object");
      }
      for (const auto& [key, value] : js.at("inputs").items()) {
        stage.inputs[key] = ref_list(value, "stage " + stage.name + ", input " + key);
      }
    }
    config.stages.push_back(std::move(stage));
  }
  return config;
}

RunConfig RunConfig::load(const fs::path& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigInvalidError("cannot open config: " + config_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("config " + config_path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(config_path).parent_path());
}

std::string hash_path(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<std::string> rels;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file()) {
        rels.push_back(fs::relative(entry.path(), path).generic_string());
      }
    }
    std::sort(rels.begin(), rels.end());
    std::string listing;
    for (const auto& rel : rels) {
      listing += "F " + rel + "\t" + sha256_file_hex((path / rel).string()) + "\n";
    }
    return sha256_hex(listing);
  }
  return sha256_file_hex(path.string());
}

const StageResult& RunResult::stage(const std::string& name) const {
  for (const auto& s : stages) {
    if (s.name == name) return s;
  }
  throw ConfigInvalidError("no such stage in run result: " + name);
}

fs::path RunResult::artifact(const std::string& ref) const {
  const auto colon = ref.find(':');
  if (colon == std::string::npos) {
    throw ConfigInvalidError("artifact ref must be <stage>:<output>, got " + ref);
  }
  const auto& s = stage(ref.substr(0, colon));
  const auto key = ref.substr(colon + 1);
  const auto it = s.outputs.find(key);
  if (it == s.outputs.end()) {
    throw ConfigInvalidError("stage " + s.name + " has no output '" + key + "'");
  }
  return workspace / it->second.ref;
}

namespace {

struct ResolvedInput {
  std::string display;  // as written in the config
  fs::path path;
  std::string sha256;   // filled once per run, reused for key and manifest
};

// Resolves one stage's inputs against earlier results; enforces ordering
// (references to later stages are config errors, making the DAG acyclic by
// construction) and external-file existence.
std::map<std::string, std::vector<ResolvedInput>> resolve_inputs(
    const RunConfig& config, const StageConfig& stage,
    const std::map<std::string, const StageResult*>& done,
    const std::set<std::string>& all_names) {
  std::map<std::string, std::vector<ResolvedInput>> resolved;
  for (const auto& [key, refs] : stage.inputs) {
    for (const auto& ref : refs) {
      const auto parsed = parse_ref(ref, all_names);
      if (parsed.is_stage_ref) {
        const auto it = done.find(parsed.stage);
        if (it == done.end()) {
          throw ConfigInvalidError("stage " + stage.name + " consumes " + ref +
                                   " but stage " + parsed.stage + " runs later");
        }
        const auto out = it->second->outputs.find(parsed.output);
        if (out == it->second->outputs.end()) {
          throw ConfigInvalidError("stage " + stage.name + ": " + parsed.stage +
                                   " has no output '" + parsed.output + "'");
        }
        resolved[key].push_back({ref, config.workspace / out->second.ref});
      } else {
        fs::path path(ref);
        if (path.is_relative()) path = config.base_dir / path;
        if (!fs::exists(path)) {
          throw ConfigInvalidError("stage " + stage.name + ": external input " +
                                   ref + " not found at " + path.string());
        }
        resolved[key].push_back({ref, path});
      }
    }
  }
  return resolved;
}

std::string stage_key(const StageConfig& stage, std::uint64_t seed,
                      const std::map<std::string, std::vector<ResolvedInput>>& inputs) {
  json key_doc;
  key_doc["kind"] = stage.kind;
  key_doc["params"] = stage.params;
  key_doc["seed"] = seed;
  key_doc["tool"] = std::string(kToolVersion);
  json in_doc = json::object();
  for (const auto& [key, list] : inputs) {
    json hashes = json::array();
    for (const auto& input : list) hashes.push_back(input.sha256);
    in_doc[key] = hashes;
  }
  key_doc["inputs"] = in_doc;
  return sha256_hex(key_doc.dump());
}

void refresh_alias(const fs::path& workspace, const std::string& name,
                   const std::string& key) {
  const fs::path alias = workspace / name;
  std::error_code ec;
  if (fs::is_symlink(alias)) fs::remove(alias, ec);
  if (!fs::exists(alias)) {
    fs::create_directory_symlink(fs::path(".cas") / key, alias, ec);
  }
}

json manifest_json(const RunConfig& config, const std::vector<StageResult>& stages) {
  json doc;
  doc["tool_version"] = std::string(kToolVersion);
  doc["seed"] = config.seed;
  json js = json::array();
  for (const auto& s : stages) {
    json inputs = json::object();
    for (const auto& [key, list] : s.inputs) {
      json arr = json::array();
      for (const auto& in : list) arr.push_back({{"ref", in.ref}, {"sha256", in.sha256}});
      inputs[key] = arr;
    }
    json outputs = json::object();
    for (const auto& [key, out] : s.outputs) {
      json entry{{"path", out.ref}};
      if (out.sha256.empty()) {
        entry["sha256"] = nullptr;  // wall-clock artifact, excluded from hashing
      } else {
        entry["sha256"] = out.sha256;
      }
      outputs[key] = entry;
    }
    js.push_back({{"name", s.name},
                  {"kind", s.kind},
                  {"key", s.key},
                  {"seed", s.seed},
                  {"inputs", inputs},
                  {"outputs", outputs}});
  }
  doc["stages"] = js;
  return doc;
}

}  // namespace

RunResult run(const RunConfig& config) {
  const fs::path cas = config.workspace / ".cas";
  fs::create_directories(cas);

  std::set<std::string> all_names;
  for (const auto& stage : config.stages) all_names.insert(stage.name);

  RunResult result;
  result.workspace = config.workspace;
  result.stages.reserve(config.stages.size());  // keeps `done` pointers stable
  std::map<std::string, const StageResult*> done;

  for (const auto& stage : config.stages) {
    const std::uint64_t seed = derive_seed(config.seed, stage.name);
    auto resolved = resolve_inputs(config, stage, done, all_names);
    for (auto& [ikey, list] : resolved) {
      (void)ikey;
      for (auto& input : list) input.sha256 = hash_path(input.path);
    }
    const std::string key = stage_key(stage, seed, resolved);
    const fs::path out_dir = cas / key;
    const fs::path marker = out_dir / ".stage.json";

    StageResult record;
    record.name = stage.name;
    record.kind = stage.kind;
    record.key = key;
    record.seed = seed;
    record.out_dir = out_dir;
    for (const auto& [ikey, list] : resolved) {
      for (const auto& input : list) {
        record.inputs[ikey].push_back({input.display, input.sha256});
      }
    }

    std::vector<StageOutput> outputs;
    if (fs::exists(marker)) {
      record.cached = true;
      json meta;
      std::ifstream in(marker);
      in >> meta;
      for (const auto& jo : meta.at("outputs")) {
        outputs.push_back({jo.at("name").get<std::string>(),
                           jo.at("relpath").get<std::string>(),
                           jo.at("hashed").get<bool>()});
      }
    } else {
      StageContext ctx;
      ctx.params = stage.params;
      for (const auto& [ikey, list] : resolved) {
        for (const auto& input : list) ctx.inputs[ikey].push_back(input.path);
      }
      ctx.seed = seed;
      const fs::path tmp = cas / ("tmp-" + key);
      fs::remove_all(tmp);
      fs::create_directories(tmp);
      ctx.out_dir = tmp;
      try {
        outputs = stage_registry().at(stage.kind)(ctx);
        json meta;
        json jo = json::array();
        for (const auto& out : outputs) {
          if (!fs::exists(tmp / out.relpath)) {
            throw StageFailedError("stage " + stage.name + " produced no '" +
                                   out.name + "' (" + out.relpath + ")");
          }
          jo.push_back(
              {{"name", out.name}, {"relpath", out.relpath}, {"hashed", out.hashed}});
        }
        meta["kind"] = stage.kind;
        meta["outputs"] = jo;
        write_text_file(tmp / ".stage.json", meta.dump(2) + "\n");
        fs::remove_all(out_dir);
        fs::rename(tmp, out_dir);
      } catch (const StageFailedError&) {
        fs::remove_all(tmp);
        throw;
      } catch (const std::exception& e) {
        fs::remove_all(tmp);
        throw StageFailedError("stage " + stage.name + " (kind " + stage.kind +
                               "): " + e.what());
      }
    }

    for (const auto& out : outputs) {
      const fs::path artifact = out_dir / out.relpath;
      if (!fs::exists(artifact)) {
        throw StageFailedError("stage " + stage.name + ": cached artifact missing: " +
                               artifact.string());
      }
      ArtifactRef ref;
      ref.ref = (fs::path(".cas") / key / out.relpath).generic_string();
      if (out.hashed) ref.sha256 = hash_path(artifact);
      record.outputs[out.name] = std::move(ref);
    }
    refresh_alias(config.workspace, stage.name, key);

    result.stages.push_back(std::move(record));
    done[stage.name] = &result.stages.back();
  }

  result.manifest_path = config.workspace / "run.json";
  write_text_file(result.manifest_path, manifest_json(config, result.stages).dump(2) + "\n");
  return result;
}

std::string dry_run_text(const RunConfig& config) {
  std::set<std::string> all_names;
  for (const auto& stage : config.stages) all_names.insert(stage.name);

  std::ostringstream out;
  out << "workspace: " << config.workspace.generic_string() << "\n";
  out << "seed: " << config.seed << "\n";
  std::set<std::string> earlier;
  int index = 1;
  for (const auto& stage : config.stages) {
    out << index++ << ". " << stage.name << " (kind " << stage.kind << ", seed "
        << derive_seed(config.seed, stage.name) << ")\n";
    if (!stage.params.empty()) out << "   params: " << stage.params.dump() << "\n";
    for (const auto& [key, refs] : stage.inputs) {
      for (const auto& ref : refs) {
        const auto parsed = parse_ref(ref, all_names);
        out << "   in  " << key << " <- " << ref;
        if (parsed.is_stage_ref) {
          if (!earlier.count(parsed.stage)) {
            throw ConfigInvalidError("stage " + stage.name + " consumes " + ref +
                                     " but stage " + parsed.stage + " runs later");
          }
        } else {
          fs::path path(ref);
          if (path.is_relative()) path = config.base_dir / path;
          out << (fs::exists(path) ? "" : "  (missing)");
        }
        out << "\n";
      }
    }
    earlier.insert(stage.name);
  }
  return out.str();
}

}  // namespace mmfnd::pipeline
