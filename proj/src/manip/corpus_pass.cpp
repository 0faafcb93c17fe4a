#include "mmfnd/manip/corpus_pass.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"
#include "mmfnd/core/registry.hpp"

namespace mmfnd::manip {

using nlohmann::json;

namespace {

// Pools keyed by split under SAME_SPLIT scope, one shared pool otherwise;
// built once per key, not per post.
struct Pools {
  Pools(const DatasetSplit& input, PoolScope scope) : input_(input), scope_(scope) {}

  const std::vector<std::string>& events(const Post& post) {
    auto [it, fresh] = event_pools_.try_emplace(key(post));
    if (fresh) {
      std::set<std::string> events;
      for (const Post& p : input_.posts) {
        if (in_scope(p, post) && p.event_id) events.insert(*p.event_id);
      }
      it->second.assign(events.begin(), events.end());
    }
    return it->second;
  }

  const std::vector<ImagePoolEntry>& images(const Post& post) {
    auto [it, fresh] = image_pools_.try_emplace(key(post));
    if (fresh) {
      for (const Post& p : input_.posts) {
        if (in_scope(p, post)) it->second.push_back({p.image_ref, event_key_of(p)});
      }
    }
    return it->second;
  }

 private:
  int key(const Post& post) const {
    return scope_ == PoolScope::SAME_SPLIT ? static_cast<int>(post.split) : -1;
  }
  bool in_scope(const Post& p, const Post& post) const {
    return scope_ == PoolScope::WHOLE_SET || p.split == post.split;
  }

  const DatasetSplit& input_;
  PoolScope scope_;
  std::map<int, std::vector<std::string>> event_pools_;
  std::map<int, std::vector<ImagePoolEntry>> image_pools_;
};

}  // namespace

std::vector<ProvenanceEntry> ManipulatedCorpus::provenance() const {
  std::vector<ProvenanceEntry> entries;
  entries.reserve(split.size());
  for (std::size_t i = 0; i < split.size(); ++i) {
    entries.push_back({split.posts[i].id, records[i]});
  }
  return entries;
}

ManipulatedCorpus apply_technique(const DatasetSplit& input, Technique technique,
                                  const PassOptions& options) {
  if ((technique == Technique::EVT_REP || technique == Technique::EVT_REM) &&
      options.aliases == nullptr) {
    throw ConfigInvalidError("technique needs an alias table");
  }
  if (technique == Technique::REAL_IM && options.curated == nullptr) {
    throw ConfigInvalidError("realim needs a curated image map");
  }
  if (technique == Technique::ENTITY_REP && options.tagger == nullptr) {
    throw ConfigInvalidError("entrep needs an entity tagger");
  }

  EntityIndex built_index;
  const EntityIndex* index = options.entity_index;
  if (technique == Technique::ENTITY_REP && index == nullptr) {
    built_index = build_entity_index(input, *options.tagger);
    index = &built_index;
  }

  ManipulatedCorpus out;
  Pools pools(input, options.pool_scope);
  std::vector<Post> posts;
  auto skip = [&](const Post& post, const std::exception& e) {
    out.skipped.push_back({post.id, e.what()});
    std::cerr << "[mmfnd] manipulate: skipping '" << post.id << "': " << e.what() << "\n";
  };

  for (const Post& post : input.posts) {
    const std::uint64_t seed = derive_seed(options.seed, post.id);
    try {
      std::optional<Manipulated> made;
      switch (technique) {
        case Technique::EVT_REP:
          made = event_replace(post, *options.aliases, pools.events(post), seed);
          break;
        case Technique::EVT_REM:
          made = event_remove(post, *options.aliases);
          break;
        case Technique::FAKE_IM:
          made = fake_image_replace(post, pools.images(post), seed);
          break;
        case Technique::REAL_IM:
          made = real_image_replace(post, *options.curated);
          break;
        case Technique::ENTITY_REP:
          made = entity_replace(post, *options.tagger, *index, seed);
          if (!made) {
            out.skipped.push_back({post.id, "no replaceable entity detected"});
            continue;
          }
          break;
      }
      if (technique == Technique::EVT_REM) out.pending.add(made->post.id);
      posts.push_back(std::move(made->post));
      out.records.push_back(std::move(made->record));
    } catch (const EventMismatchError&) {
      throw;  // a violated manual guarantee must not be papered over
    } catch (const EventNotInTextError& e) {
      skip(post, e);
    } catch (const EmptyPoolError& e) {
      skip(post, e);
    } catch (const EmptyTextAfterRemovalError& e) {
      skip(post, e);
    } catch (const MissingCurationError& e) {
      skip(post, e);
    }
  }
  out.split = register_split(input.name + "!" + std::string(to_string(technique)),
                             std::move(posts));
  return out;
}

EntityIndex build_entity_index(const DatasetSplit& input, EntityTagger& tagger) {
  std::map<std::string, std::set<std::string>> collected;
  for (const Post& post : input.posts) {
    for (const EntitySpan& span : tagger.tag(post.text)) {
      if (replaceable_entity_types().count(span.entity_type)) {
        collected[span.entity_type].insert(span.surface);
      }
    }
  }
  EntityIndex index;
  for (auto& [type, surfaces] : collected) {
    index[type] = {surfaces.begin(), surfaces.end()};
  }
  return index;
}

EntityIndex load_entity_index(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ConfigInvalidError("cannot open entity index: " + json_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("entity index " + json_path.string() + ": " + e.what());
  }
  return j.get<EntityIndex>();
}

void save_entity_index(const EntityIndex& index, const std::filesystem::path& json_path) {
  std::ofstream out(json_path);
  out << json(index).dump(2) << "\n";
}

CuratedMap load_curated_map(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ConfigInvalidError("cannot open curated map: " + json_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("curated map " + json_path.string() + ": " + e.what());
  }
  CuratedMap curated;
  for (const auto& [post_id, entry] : j.items()) {
    CuratedImage image;
    image.image_ref = entry.at("image_ref").get<std::string>();
    if (entry.contains("event_id") && !entry.at("event_id").is_null()) {
      image.event_id = entry.at("event_id").get<std::string>();
    }
    curated[post_id] = std::move(image);
  }
  return curated;
}

void save_curated_map(const CuratedMap& curated, const std::filesystem::path& json_path) {
  json j = json::object();
  for (const auto& [post_id, image] : curated) {
    json entry;
    entry["image_ref"] = image.image_ref;
    if (image.event_id) entry["event_id"] = *image.event_id;
    j[post_id] = std::move(entry);
  }
  std::ofstream out(json_path);
  out << j.dump(2) << "\n";
}

std::vector<std::pair<std::string, Label>> read_annotation_rows(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open annotation file: " + path.string());
  std::vector<std::pair<std::string, Label>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw EncodingError("annotation " + path.string() + ":" + std::to_string(line_no) +
                          ": expected 'post_id<TAB>label'");
    }
    rows.emplace_back(line.substr(0, tab), label_from_string(line.substr(tab + 1)));
  }
  return rows;
}

void write_annotation_rows(const std::vector<std::pair<std::string, Label>>& rows,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write annotation file: " + path.string());
  for (const auto& [id, label] : rows) out << id << "\t" << to_string(label) << "\n";
}

}  // namespace mmfnd::manip
