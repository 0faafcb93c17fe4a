#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/registry.hpp"
#include "mmfnd/ingest/adapters.hpp"

namespace mmfnd::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

bool has_video_extension(const std::string& media_id) {
  static const char* kVideoExts[] = {".mp4", ".avi", ".mov", ".webm", ".mkv", ".flv"};
  std::string lowered = media_id;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const char* ext : kVideoExts) {
    if (lowered.size() >= std::strlen(ext) &&
        lowered.compare(lowered.size() - std::strlen(ext), std::strlen(ext), ext) == 0) {
      return true;
    }
  }
  return false;
}

}  // namespace

ColumnMap ColumnMap::load(const fs::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ConfigInvalidError("cannot open column map: " + json_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalidError("column map " + json_path.string() + ": " + e.what());
  }
  ColumnMap map;
  auto get = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j.at(key).get<std::string>();
  };
  get("tweet_id", map.tweet_id);
  get("tweet_text", map.tweet_text);
  get("tweet_images", map.tweet_images);
  get("tweet_event", map.tweet_event);
  get("tweet_label", map.tweet_label);
  get("tweet_media_type", map.tweet_media_type);
  get("image_separator", map.image_separator);
  get("caption_id", map.caption_id);
  get("caption_text", map.caption_text);
  get("caption_image", map.caption_image);
  get("caption_source", map.caption_source);
  get("caption_topic", map.caption_topic);
  get("images_subdir", map.images_subdir);
  if (j.contains("tweet_split_files")) {
    map.tweet_split_files = j.at("tweet_split_files").get<std::map<std::string, std::string>>();
  }
  if (j.contains("caption_split_files")) {
    map.caption_split_files =
        j.at("caption_split_files").get<std::map<std::string, std::string>>();
  }
  return map;
}

std::vector<RawTweetRecord> parse_tweet_file(const fs::path& path, const ColumnMap& map,
                                             bool permissive) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open tweet file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaMismatchError("tweet file is empty: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_on(line, '\t');
  auto column_of = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int id_col = column_of(map.tweet_id);
  const int text_col = column_of(map.tweet_text);
  const int images_col = column_of(map.tweet_images);
  const int event_col = column_of(map.tweet_event);
  const int label_col = column_of(map.tweet_label);
  const int media_type_col =
      map.tweet_media_type.empty() ? -1 : column_of(map.tweet_media_type);
  if (id_col < 0 || text_col < 0 || images_col < 0 || label_col < 0) {
    throw SchemaMismatchError("tweet file " + path.string() +
                              " misses a mapped column (check the column map)");
  }

  std::vector<RawTweetRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_on(line, '\t');
    auto field = [&](int col) -> std::string {
      return (col >= 0 && col < static_cast<int>(fields.size())) ? fields[col] : "";
    };
    if (static_cast<int>(fields.size()) <= std::max({id_col, text_col, images_col, label_col})) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": too few columns";
      if (permissive) {
        std::cerr << "[mmfnd] ingest: skipping row: " << msg.str() << "\n";
        continue;
      }
      throw MalformedRecordError(msg.str());
    }
    RawTweetRecord rec;
    rec.tweet_id = trim(field(id_col));
    rec.tweet_text = field(text_col);
    for (auto& id : split_on(field(images_col),
                             map.image_separator.empty() ? ',' : map.image_separator[0])) {
      id = trim(id);
      if (!id.empty()) rec.media_ids.push_back(id);
    }
    rec.event_tag = trim(field(event_col));
    rec.veracity_tag = trim(field(label_col));
    if (media_type_col >= 0) {
      std::string mt = trim(field(media_type_col));
      std::transform(mt.begin(), mt.end(), mt.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      rec.media_type = (mt == "video") ? MediaType::VIDEO : MediaType::IMAGE;
    } else {
      rec.media_type = MediaType::IMAGE;
      for (const auto& id : rec.media_ids) {
        if (has_video_extension(id)) {
          rec.media_type = MediaType::VIDEO;
          break;
        }
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

DirectoryImageLocator::DirectoryImageLocator(fs::path source_dir, ImageStore& store)
    : source_dir_(std::move(source_dir)), store_(store) {}

std::optional<std::string> DirectoryImageLocator::locate(const std::string& media_id) {
  auto hit = cache_.find(media_id);
  if (hit != cache_.end()) {
    return hit->second.empty() ? std::nullopt : std::optional<std::string>(hit->second);
  }
  static const char* kImageExts[] = {"", ".jpg", ".jpeg", ".png", ".gif", ".ppm", ".pgm", ".bmp"};
  for (const char* ext : kImageExts) {
    fs::path candidate = source_dir_ / (media_id + ext);
    if (fs::exists(candidate) && fs::is_regular_file(candidate)) {
      std::string ref = store_.add_file(candidate);
      cache_[media_id] = ref;
      return ref;
    }
  }
  cache_[media_id] = "";
  return std::nullopt;
}

DatasetSplit ingest_mediaeval_corpus(const fs::path& source_dir, const ColumnMap& map,
                                     ImageStore& store, const IngestOptions& opts) {
  DirectoryImageLocator locator(source_dir / map.images_subdir, store);
  std::vector<DatasetSplit> parts;
  for (const auto& [split_name, file_name] : map.tweet_split_files) {
    fs::path file = source_dir / file_name;
    if (!fs::exists(file)) continue;
    IngestOptions split_opts = opts;
    split_opts.split = split_from_string(split_name);
    auto records = parse_tweet_file(file, map, opts.permissive);
    parts.push_back(ingest_tweets(records, locator, split_opts,
                                  std::string(to_string(opts.origin)) + "." + split_name));
  }
  if (parts.empty()) {
    throw ConfigInvalidError("no tweet split files found under " + source_dir.string());
  }
  return merge_splits(parts, std::string(to_string(opts.origin)));
}

}  // namespace mmfnd::ingest
