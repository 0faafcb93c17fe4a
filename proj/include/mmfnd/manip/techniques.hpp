#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmfnd/core/types.hpp"
#include "mmfnd/manip/alias_table.hpp"
#include "mmfnd/manip/tagger.hpp"

namespace mmfnd::manip {

// Entity types eligible for replacement; numeric/quantity types stay put.
const std::set<std::string>& replaceable_entity_types();

// FAKE for EVT_REP/FAKE_IM/ENTITY_REP, REAL for REAL_IM, nullopt for
// EVT_REM (annotation import decides).
std::optional<Label> resulting_label_for(Technique technique);

// "<source-id>!<technique-slug>", e.g. "me2015/42#0!evtrep".
std::string derived_post_id(const std::string& source_id, Technique technique);

struct Manipulated {
  Post post;
  ManipulationRecord record;
};

// Rewrites every alias occurrence of the post's event to the target event's
// canonical surface. Target is sampled uniformly from pool entries that
// differ from the post's event. Label flips to FAKE.
Manipulated event_replace(const Post& post, const AliasTable& aliases,
                          std::span<const std::string> event_pool, std::uint64_t seed);

// Deletes every alias occurrence, then repairs whitespace and dangling
// punctuation. Label stays undecided until an annotation import.
Manipulated event_remove(const Post& post, const AliasTable& aliases);

struct ImagePoolEntry {
  std::string image_ref;
  // Event id for event-tagged corpora; source post id otherwise, so
  // "different event" degrades to "different source post".
  std::string event_key;
};

std::string event_key_of(const Post& post);

// Swaps the image for a uniformly sampled pool entry from a different
// event. Label flips to FAKE.
Manipulated fake_image_replace(const Post& post, std::span<const ImagePoolEntry> pool,
                               std::uint64_t seed);

struct CuratedImage {
  std::string image_ref;
  std::optional<std::string> event_id;  // event the curated image depicts
};

using CuratedMap = std::map<std::string, CuratedImage>;  // post id -> image

// Swaps the image for the manually curated same-event image. Label stays
// REAL. MissingCurationError when the post has no curated entry;
// EventMismatchError when the curated event differs (the manual guarantee
// is violated, so this is a hard error).
Manipulated real_image_replace(const Post& post, const CuratedMap& curated);

using EntityIndex = std::map<std::string, std::vector<std::string>>;  // type -> surfaces

// Replaces every detected entity (right-to-left) with a same-type surface
// sampled uniformly from the index, never the original. Returns nullopt
// when the tagger finds no replaceable entity (the post is excluded).
// A type whose index holds only the original surface leaves that span
// unchanged; if all spans end up unchanged the post is excluded too.
std::optional<Manipulated> entity_replace(const Post& post, EntityTagger& tagger,
                                          const EntityIndex& index, std::uint64_t seed);

// Tracks EVT_REM posts awaiting a human label.
class PendingAnnotationSet {
 public:
  void add(std::string post_id);
  bool pending(const std::string& post_id) const;
  std::size_t size() const { return pending_.size(); }
  bool empty() const { return pending_.empty(); }
  std::vector<std::string> ids() const;  // sorted

  // Applies labels to the matching posts (and their provenance records when
  // given). Every row must name an existing, pending post. Returns the
  // applied count; the pending set shrinks accordingly.
  std::size_t import_annotations(std::span<const std::pair<std::string, Label>> rows,
                                 DatasetSplit& split,
                                 std::vector<ManipulationRecord>* records = nullptr);

 private:
  std::set<std::string> pending_;
};

}  // namespace mmfnd::manip
