#include "mmfnd/manip/provenance.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"

namespace mmfnd::manip {

using nlohmann::json;

namespace {

json to_json(const ProvenanceEntry& entry) {
  const ManipulationRecord& r = entry.record;
  json j;
  j["post_id"] = entry.post_id;
  j["technique"] = std::string(to_string(r.technique));
  j["source_id"] = r.source_id;
  j["seed"] = r.seed;
  if (r.resulting_label) j["resulting_label"] = std::string(to_string(*r.resulting_label));
  if (!r.text_replacements.empty()) {
    json reps = json::array();
    for (const TextReplacement& t : r.text_replacements) {
      reps.push_back({{"start", t.start},
                      {"end", t.end},
                      {"old", t.old_surface},
                      {"new", t.new_surface}});
    }
    j["text_replacements"] = std::move(reps);
  }
  if (r.image_replacement) {
    j["image_replacement"] = {{"old_ref", r.image_replacement->old_ref},
                              {"new_ref", r.image_replacement->new_ref}};
  }
  return j;
}

ProvenanceEntry from_json(const json& j) {
  ProvenanceEntry entry;
  entry.post_id = j.at("post_id").get<std::string>();
  ManipulationRecord& r = entry.record;
  r.technique = technique_from_string(j.at("technique").get<std::string>());
  r.source_id = j.at("source_id").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("resulting_label")) {
    r.resulting_label = label_from_string(j.at("resulting_label").get<std::string>());
  }
  if (j.contains("text_replacements")) {
    for (const auto& t : j.at("text_replacements")) {
      r.text_replacements.push_back({t.at("start").get<std::size_t>(),
                                     t.at("end").get<std::size_t>(),
                                     t.at("old").get<std::string>(),
                                     t.at("new").get<std::string>()});
    }
  }
  if (j.contains("image_replacement")) {
    const auto& im = j.at("image_replacement");
    r.image_replacement = ImageReplacement{im.at("old_ref").get<std::string>(),
                                           im.at("new_ref").get<std::string>()};
  }
  return entry;
}

}  // namespace

void write_provenance(const std::vector<ProvenanceEntry>& entries,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write provenance file: " + path.string());
  for (const ProvenanceEntry& entry : entries) out << to_json(entry).dump() << "\n";
}

std::vector<ProvenanceEntry> read_provenance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read provenance file: " + path.string());
  std::vector<ProvenanceEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      entries.push_back(from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw EncodingError("provenance " + path.string() + ":" + std::to_string(line_no) +
                          ": " + e.what());
    }
  }
  return entries;
}

}  // namespace mmfnd::manip
