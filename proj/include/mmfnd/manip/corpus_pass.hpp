#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmfnd/core/types.hpp"
#include "mmfnd/manip/alias_table.hpp"
#include "mmfnd/manip/provenance.hpp"
#include "mmfnd/manip/tagger.hpp"
#include "mmfnd/manip/techniques.hpp"

namespace mmfnd::manip {

struct SkippedPost {
  std::string id;
  std::string reason;
};

// A technique applied to a whole split: derived posts plus their provenance
// (parallel vectors) and what was skipped. pending is non-empty only for
// EVT_REM, whose labels await import_annotations.
struct ManipulatedCorpus {
  DatasetSplit split;
  std::vector<ManipulationRecord> records;
  std::vector<SkippedPost> skipped;
  PendingAnnotationSet pending;

  std::vector<ProvenanceEntry> provenance() const;
};

// Whether evt_rep/fake_im pools draw from the post's own split only
// (the default) or from the whole input set.
enum class PoolScope { SAME_SPLIT, WHOLE_SET };

struct PassOptions {
  std::uint64_t seed = 0;
  PoolScope pool_scope = PoolScope::SAME_SPLIT;
  // EVT_REP / EVT_REM
  const AliasTable* aliases = nullptr;
  // REAL_IM
  const CuratedMap* curated = nullptr;
  // ENTITY_REP
  EntityTagger* tagger = nullptr;
  // Optional pre-built index; built from the corpus when absent.
  const EntityIndex* entity_index = nullptr;
};

// Applies one technique to every post of the input split. Per-post
// manipulations run with seeds derived from (options.seed, post.id), so any
// sharding of the loop produces identical output. Per-post precondition
// failures (EventNotInText, EmptyPool, zero entities, empty text, missing
// curation) skip the post with a log entry; EventMismatch propagates.
ManipulatedCorpus apply_technique(const DatasetSplit& input, Technique technique,
                                  const PassOptions& options);

// Collects every replaceable entity surface of the split, per type, sorted
// and deduplicated: the default replacement pool for corpus-scale runs.
EntityIndex build_entity_index(const DatasetSplit& input, EntityTagger& tagger);

EntityIndex load_entity_index(const std::filesystem::path& json_path);
void save_entity_index(const EntityIndex& index, const std::filesystem::path& json_path);

CuratedMap load_curated_map(const std::filesystem::path& json_path);
void save_curated_map(const CuratedMap& curated, const std::filesystem::path& json_path);

// Annotation rows "post_id<TAB>label", one per line, '#' comments allowed.
std::vector<std::pair<std::string, Label>> read_annotation_rows(
    const std::filesystem::path& path);
void write_annotation_rows(const std::vector<std::pair<std::string, Label>>& rows,
                           const std::filesystem::path& path);

}  // namespace mmfnd::manip
