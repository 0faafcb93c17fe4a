#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/registry.hpp"
#include "mmfnd/ingest/adapters.hpp"

namespace mmfnd::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string string_field(const json& entry, const std::string& key) {
  if (!entry.contains(key)) return "";
  const json& v = entry.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.dump();
}

RawCaptionRecord record_from_json(const json& entry, const ColumnMap& map) {
  RawCaptionRecord rec;
  rec.article_id = string_field(entry, map.caption_id);
  rec.caption = string_field(entry, map.caption_text);
  rec.image_path = string_field(entry, map.caption_image);
  rec.source = string_field(entry, map.caption_source);
  if (entry.contains(map.caption_topic) && entry.at(map.caption_topic).is_string()) {
    rec.topic = entry.at(map.caption_topic).get<std::string>();
  }
  return rec;
}

}  // namespace

std::vector<RawCaptionRecord> parse_caption_file(const fs::path& path, const ColumnMap& map,
                                                 bool permissive) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open caption file: " + path.string());

  std::vector<RawCaptionRecord> records;
  auto take = [&](const json& entry, std::size_t index) {
    if (!entry.is_object()) {
      std::string msg = path.string() + ": entry " + std::to_string(index) + " is not an object";
      if (permissive) {
        std::cerr << "[mmfnd] ingest: skipping entry: " << msg << "\n";
        return;
      }
      throw MalformedRecordError(msg);
    }
    records.push_back(record_from_json(entry, map));
  };

  // Accept either one JSON array or JSON-lines; peek at the first
  // non-whitespace byte to decide.
  int c = in.peek();
  while (c != EOF && std::isspace(c)) {
    in.get();
    c = in.peek();
  }
  if (c == '[') {
    json root;
    try {
      in >> root;
    } catch (const json::exception& e) {
      throw MalformedRecordError(path.string() + ": " + e.what());
    }
    for (std::size_t i = 0; i < root.size(); ++i) take(root[i], i);
  } else {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json entry;
      try {
        entry = json::parse(line);
      } catch (const json::exception& e) {
        std::string msg = path.string() + ":" + std::to_string(line_no) + ": " + e.what();
        if (permissive) {
          std::cerr << "[mmfnd] ingest: skipping line: " << msg << "\n";
          continue;
        }
        throw MalformedRecordError(msg);
      }
      take(entry, line_no);
    }
  }
  return records;
}

DatasetSplit ingest_visualnews_corpus(const fs::path& source_dir, const ColumnMap& map,
                                      ImageStore& store, const IngestOptions& opts) {
  DirectoryImageLocator locator(source_dir / map.images_subdir, store);
  std::vector<DatasetSplit> parts;
  for (const auto& [split_name, file_name] : map.caption_split_files) {
    fs::path file = source_dir / file_name;
    if (!fs::exists(file)) continue;
    IngestOptions split_opts = opts;
    split_opts.split = split_from_string(split_name);
    auto records = parse_caption_file(file, map, opts.permissive);
    parts.push_back(ingest_captions(records, locator, split_opts,
                                    std::string(to_string(opts.origin)) + "." + split_name));
  }
  if (parts.empty()) {
    throw ConfigInvalidError("no caption split files found under " + source_dir.string());
  }
  return merge_splits(parts, std::string(to_string(opts.origin)));
}

}  // namespace mmfnd::ingest
