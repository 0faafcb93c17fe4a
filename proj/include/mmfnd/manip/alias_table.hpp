#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mmfnd::manip {

// One surface-form occurrence of an event alias inside a text.
struct AliasMatch {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  std::string surface;  // as it appears in the text
};

// Maps each event id to its surface forms (hashtags, names, case variants).
// Matching is case-insensitive and whole-token; '#' and '@' count as token
// characters so plain aliases never fire inside hashtags or mentions —
// hashtag forms must be listed explicitly.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::map<std::string, std::vector<std::string>> aliases);

  static AliasTable load(const std::filesystem::path& json_path);
  void save(const std::filesystem::path& json_path) const;

  bool has_event(const std::string& event_id) const;
  // First listed alias; falls back to the event id itself when the event
  // is not in the table.
  std::string canonical_surface(const std::string& event_id) const;
  const std::vector<std::string>& aliases(const std::string& event_id) const;

  // Non-overlapping occurrences of any alias of event_id, in text order.
  // Longer aliases win at the same position.
  std::vector<AliasMatch> find_occurrences(const std::string& text,
                                           const std::string& event_id) const;

  std::size_t size() const { return aliases_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> aliases_;
};

}  // namespace mmfnd::manip
