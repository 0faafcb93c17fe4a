#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmfnd {

// Binary veracity label. FAKE encodes y=0, REAL encodes y=1.
enum class Label : int { FAKE = 0, REAL = 1 };

enum class Split { TRAIN, VALIDATION, TEST };

enum class Origin { ME2015, ME2016, VN, SYNTHETIC };

enum class Technique { EVT_REP, EVT_REM, FAKE_IM, REAL_IM, ENTITY_REP };

std::string_view to_string(Label v);
std::string_view to_string(Split v);
std::string_view to_string(Origin v);
std::string_view to_string(Technique v);

Label label_from_string(std::string_view s);
Split split_from_string(std::string_view s);
Origin origin_from_string(std::string_view s);
Technique technique_from_string(std::string_view s);

// One text span rewritten by a text manipulation. Offsets refer to the
// source text; surface equals source_text[start:end).
struct TextReplacement {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string old_surface;
  std::string new_surface;

  bool operator==(const TextReplacement&) const = default;
};

struct ImageReplacement {
  std::string old_ref;
  std::string new_ref;

  bool operator==(const ImageReplacement&) const = default;
};

// Provenance of a derived sample. resulting_label stays empty for EVT_REM
// until an annotation import supplies it; it is never computed.
struct ManipulationRecord {
  Technique technique = Technique::EVT_REP;
  std::string source_id;
  std::vector<TextReplacement> text_replacements;
  std::optional<ImageReplacement> image_replacement;
  std::optional<Label> resulting_label;
  std::uint64_t seed = 0;

  // Compact reference stored in the manifest's derived_from column,
  // e.g. "evtrep:me2015/42#0". Full records live in the provenance sidecar.
  std::string reference() const;

  bool operator==(const ManipulationRecord&) const = default;
};

struct Post {
  std::string id;
  std::string text;
  std::string image_ref;
  std::optional<std::string> event_id;
  Label label = Label::FAKE;
  Split split = Split::TRAIN;
  Origin origin = Origin::SYNTHETIC;
  std::optional<std::string> derived_from;

  bool operator==(const Post&) const = default;
};

struct DatasetSplit {
  std::string name;
  std::vector<Post> posts;
  std::size_t fake_count = 0;
  std::size_t real_count = 0;

  std::size_t count(Label v) const {
    return v == Label::FAKE ? fake_count : real_count;
  }
  std::size_t size() const { return posts.size(); }
  bool empty() const { return posts.empty(); }
};

// "<origin>/<native-id>": keeps ME and VN ids from colliding in merged sets.
std::string namespaced_id(Origin origin, std::string_view native_id);

}  // namespace mmfnd
