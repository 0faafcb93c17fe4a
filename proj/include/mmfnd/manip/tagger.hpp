#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mmfnd::manip {

// One detected named entity. Offsets are byte offsets into the UTF-8 text;
// surface equals text.substr(start, end - start).
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  std::string entity_type;  // person, location, organization, event, ...
};

// Returns spans in text order, non-overlapping, contract-checked.
class EntityTagger {
 public:
  virtual ~EntityTagger() = default;
  virtual std::vector<EntitySpan> tag(const std::string& text) = 0;
};

// Deterministic dictionary tagger: whole-token, case-insensitive lookup of
// known surfaces. Tests and synthetic fixtures rely on it; it stands in for
// a statistical NER system without depending on model files.
class RuleTagger : public EntityTagger {
 public:
  // surface -> entity type
  explicit RuleTagger(std::map<std::string, std::string> surface_types);
  static RuleTagger load(const std::filesystem::path& json_path);

  std::vector<EntitySpan> tag(const std::string& text) override;

 private:
  std::map<std::string, std::string> surface_types_;  // keys lowercased
  std::vector<std::string> forms_;                    // lowercased, longest first
};

// Production adapter: shells out to an off-the-shelf NER tool. The command
// reads UTF-8 text on stdin and prints a JSON array of
// {"start": n, "end": n, "surface": s, "type": s} objects on stdout.
class ExternalProcessTagger : public EntityTagger {
 public:
  explicit ExternalProcessTagger(std::string command);
  std::vector<EntitySpan> tag(const std::string& text) override;

 private:
  std::string command_;
};

// Throws SpecInvalidError unless spans are in order, non-overlapping, inside
// the text, and each surface matches its offsets.
void validate_spans(const std::string& text, const std::vector<EntitySpan>& spans);

}  // namespace mmfnd::manip
