#include "mmfnd/manip/alias_table.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"

namespace mmfnd::manip {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// '#' and '@' are token characters: "#boston" is one token, distinct from
// "boston".
bool is_token_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c == '#' || c == '@';
}

}  // namespace

AliasTable::AliasTable(std::map<std::string, std::vector<std::string>> aliases)
    : aliases_(std::move(aliases)) {
  for (const auto& [event, forms] : aliases_) {
    if (forms.empty()) {
      throw ConfigInvalidError("alias table: event '" + event + "' has no surface forms");
    }
  }
}

AliasTable AliasTable::load(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ConfigInvalidError("cannot open alias table: " + json_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("alias table " + json_path.string() + ": " + e.what());
  }
  return AliasTable(j.get<std::map<std::string, std::vector<std::string>>>());
}

void AliasTable::save(const std::filesystem::path& json_path) const {
  std::ofstream out(json_path);
  out << json(aliases_).dump(2) << "\n";
}

bool AliasTable::has_event(const std::string& event_id) const {
  return aliases_.count(event_id) != 0;
}

std::string AliasTable::canonical_surface(const std::string& event_id) const {
  auto it = aliases_.find(event_id);
  return it == aliases_.end() ? event_id : it->second.front();
}

const std::vector<std::string>& AliasTable::aliases(const std::string& event_id) const {
  auto it = aliases_.find(event_id);
  if (it == aliases_.end()) {
    throw ConfigInvalidError("alias table has no event '" + event_id + "'");
  }
  return it->second;
}

std::vector<AliasMatch> AliasTable::find_occurrences(const std::string& text,
                                                     const std::string& event_id) const {
  auto it = aliases_.find(event_id);
  if (it == aliases_.end()) return {};
  // Longest alias first so "boston marathon" beats "boston" at one position.
  std::vector<std::string> forms;
  for (const std::string& a : it->second) forms.push_back(lower(a));
  std::sort(forms.begin(), forms.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });

  const std::string haystack = lower(text);
  std::vector<AliasMatch> matches;
  std::size_t pos = 0;
  while (pos < haystack.size()) {
    bool matched = false;
    for (const std::string& form : forms) {
      if (form.empty() || haystack.compare(pos, form.size(), form) != 0) continue;
      const bool head_ok =
          pos == 0 || !is_token_char(static_cast<unsigned char>(haystack[pos - 1]));
      const std::size_t end = pos + form.size();
      const bool tail_ok =
          end == haystack.size() || !is_token_char(static_cast<unsigned char>(haystack[end]));
      if (!head_ok || !tail_ok) continue;
      matches.push_back({pos, end, text.substr(pos, form.size())});
      pos = end;
      matched = true;
      break;
    }
    if (!matched) ++pos;
  }
  return matches;
}

}  // namespace mmfnd::manip
