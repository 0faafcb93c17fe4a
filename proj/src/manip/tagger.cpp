#include "mmfnd/manip/tagger.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
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

bool is_token_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c == '#' || c == '@';
}

}  // namespace

void validate_spans(const std::string& text, const std::vector<EntitySpan>& spans) {
  std::size_t last_end = 0;
  for (const EntitySpan& s : spans) {
    if (s.start >= s.end || s.end > text.size()) {
      throw SpecInvalidError("entity span [" + std::to_string(s.start) + "," +
                             std::to_string(s.end) + ") outside text of length " +
                             std::to_string(text.size()));
    }
    if (s.start < last_end) {
      throw SpecInvalidError("entity spans overlap at offset " + std::to_string(s.start));
    }
    if (text.compare(s.start, s.end - s.start, s.surface) != 0) {
      throw SpecInvalidError("entity surface '" + s.surface + "' does not match text at [" +
                             std::to_string(s.start) + "," + std::to_string(s.end) + ")");
    }
    last_end = s.end;
  }
}

RuleTagger::RuleTagger(std::map<std::string, std::string> surface_types) {
  for (auto& [surface, type] : surface_types) {
    if (surface.empty()) throw ConfigInvalidError("rule tagger: empty surface");
    surface_types_[lower(surface)] = type;
  }
  for (const auto& [surface, type] : surface_types_) forms_.push_back(surface);
  std::sort(forms_.begin(), forms_.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
}

RuleTagger RuleTagger::load(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ConfigInvalidError("cannot open tagger rules: " + json_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("tagger rules " + json_path.string() + ": " + e.what());
  }
  return RuleTagger(j.get<std::map<std::string, std::string>>());
}

std::vector<EntitySpan> RuleTagger::tag(const std::string& text) {
  const std::string haystack = lower(text);
  std::vector<EntitySpan> spans;
  std::size_t pos = 0;
  while (pos < haystack.size()) {
    bool matched = false;
    for (const std::string& form : forms_) {
      if (haystack.compare(pos, form.size(), form) != 0) continue;
      const bool head_ok =
          pos == 0 || !is_token_char(static_cast<unsigned char>(haystack[pos - 1]));
      const std::size_t end = pos + form.size();
      const bool tail_ok =
          end == haystack.size() || !is_token_char(static_cast<unsigned char>(haystack[end]));
      if (!head_ok || !tail_ok) continue;
      spans.push_back({pos, end, text.substr(pos, form.size()), surface_types_.at(form)});
      pos = end;
      matched = true;
      break;
    }
    if (!matched) ++pos;
  }
  validate_spans(text, spans);
  return spans;
}

ExternalProcessTagger::ExternalProcessTagger(std::string command)
    : command_(std::move(command)) {
  if (command_.empty()) throw ConfigInvalidError("external tagger: empty command");
}

std::vector<EntitySpan> ExternalProcessTagger::tag(const std::string& text) {
  // Hand the text over via a temp file; popen gives us only one direction.
  static std::atomic<std::uint64_t> counter{0};
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("mmfnd_ner_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)) + ".txt");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
  }
  const std::string cmd = command_ + " < " + tmp.string();
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(tmp);
    throw StageFailedError("cannot spawn tagger command: " + command_);
  }
  std::string output;
  char buf[4096];
  std::size_t n = 0;
  while ((n = ::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = ::pclose(pipe);
  std::filesystem::remove(tmp);
  if (status != 0) {
    throw StageFailedError("tagger command failed (status " + std::to_string(status) +
                           "): " + command_);
  }

  json j;
  try {
    j = json::parse(output);
  } catch (const json::exception& e) {
    throw SpecInvalidError("tagger output is not JSON: " + std::string(e.what()));
  }
  std::vector<EntitySpan> spans;
  for (const auto& item : j) {
    EntitySpan s;
    s.start = item.at("start").get<std::size_t>();
    s.end = item.at("end").get<std::size_t>();
    s.surface = item.at("surface").get<std::string>();
    s.entity_type = item.at("type").get<std::string>();
    spans.push_back(std::move(s));
  }
  std::sort(spans.begin(), spans.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  validate_spans(text, spans);
  return spans;
}

}  // namespace mmfnd::manip
