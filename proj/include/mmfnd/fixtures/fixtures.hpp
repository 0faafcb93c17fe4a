#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfnd/core/image_store.hpp"
#include "mmfnd/core/types.hpp"
#include "mmfnd/manip/techniques.hpp"

namespace mmfnd::fixtures {

// Desk-scale synthetic corpus: REAL posts pair text and image carrying the
// same planted event key, FAKE posts carry an off-corpus decoy key, so the
// pair's mock embeddings correlate exactly when the post is real.
// signal_strength is recorded for the encoding stage's mixing weight.
struct SyntheticCorpusSpec {
  int n_train = 400;
  int n_val = 100;
  int n_test = 100;
  double fake_fraction = 0.5;
  double signal_strength = 0.9;
  std::uint64_t seed = 7;

  // SpecInvalidError unless every split has >= 2 posts and at least one
  // post of each class, fractions in range.
  void validate() const;
  nlohmann::json to_json() const;
  static SyntheticCorpusSpec from_json(const nlohmann::json& j);
  static SyntheticCorpusSpec load(const std::filesystem::path& path);
  bool operator==(const SyntheticCorpusSpec&) const = default;
};

struct SyntheticCorpus {
  DatasetSplit train;
  DatasetSplit validation;
  DatasetSplit test;
  std::map<std::string, std::vector<std::string>> alias_map;  // event -> surface forms
  std::map<std::string, std::string> tagger_map;              // entity surface -> type
  manip::EntityIndex entity_index;
  manip::CuratedMap curated;  // same-event archive image for every post
  // Stand-in manual labels for EVT_REM derivatives, keyed by derived id.
  std::vector<std::pair<std::string, Label>> evtrem_annotations;
};

// Deterministic in spec.seed; images land in the given store.
SyntheticCorpus generate_synthetic(const SyntheticCorpusSpec& spec, ImageStore& store);

struct FixturePaths {
  std::filesystem::path root;
  std::filesystem::path train_manifest;
  std::filesystem::path validation_manifest;
  std::filesystem::path test_manifest;
  std::filesystem::path images_dir;
  std::filesystem::path aliases;
  std::filesystem::path tagger;
  std::filesystem::path entities;
  std::filesystem::path curated;
  std::filesystem::path annotations;
  std::filesystem::path fixture_file;
};

FixturePaths fixture_paths(const std::filesystem::path& root);
// Generates and writes the full fixture tree under out_dir.
FixturePaths write_synthetic_fixture(const SyntheticCorpusSpec& spec,
                                     const std::filesystem::path& out_dir);
// Reads the spec back from fixture.json.
SyntheticCorpusSpec load_fixture_spec(const std::filesystem::path& root);

// Miniature raw source trees in the published layouts, for exercising the
// ingestion adapters offline: tweet TSVs with a video row, a multi-image
// row and a missing image, and caption JSON/JSONL files.
void write_mediaeval_mini(const std::filesystem::path& dir);
void write_visualnews_mini(const std::filesystem::path& dir);

}  // namespace mmfnd::fixtures
