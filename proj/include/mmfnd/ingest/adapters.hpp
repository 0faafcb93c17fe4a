#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mmfnd/core/image_store.hpp"
#include "mmfnd/ingest/records.hpp"

namespace mmfnd::ingest {

// Column-mapping configuration so format drift across dataset releases stays
// configuration, not code. Loaded from JSON; every key has a sensible
// default for the published file layouts.
struct ColumnMap {
  // tweet files (tab-separated, one tweet per line, header row)
  std::string tweet_id = "tweet_id";
  std::string tweet_text = "tweet_text";
  std::string tweet_images = "image_id(s)";
  std::string tweet_event = "event";
  std::string tweet_label = "label";
  std::string tweet_media_type;  // optional column; empty = infer from extension
  std::string image_separator = ",";

  // caption metadata (JSON array or JSON-lines)
  std::string caption_id = "id";
  std::string caption_text = "caption";
  std::string caption_image = "image_path";
  std::string caption_source = "source";
  std::string caption_topic = "topic";

  // per-split source files relative to the corpus directory
  std::map<std::string, std::string> tweet_split_files = {
      {"train", "train.tsv"}, {"validation", "validation.tsv"}, {"test", "test.tsv"}};
  std::map<std::string, std::string> caption_split_files = {
      {"train", "train.json"}, {"validation", "validation.json"}, {"test", "test.json"}};
  std::string images_subdir = "images";

  static ColumnMap load(const std::filesystem::path& json_path);
};

std::vector<RawTweetRecord> parse_tweet_file(const std::filesystem::path& path,
                                             const ColumnMap& map, bool permissive);

std::vector<RawCaptionRecord> parse_caption_file(const std::filesystem::path& path,
                                                 const ColumnMap& map, bool permissive);

// Resolves media ids against a source image directory and registers hits in
// the content-addressed store.
class DirectoryImageLocator : public ImageLocator {
 public:
  DirectoryImageLocator(std::filesystem::path source_dir, ImageStore& store);
  std::optional<std::string> locate(const std::string& media_id) override;

 private:
  std::filesystem::path source_dir_;
  ImageStore& store_;
  std::map<std::string, std::string> cache_;
};

// Ingests every split file present under source_dir into one manifest-ready
// split (posts carry their split tag).
DatasetSplit ingest_mediaeval_corpus(const std::filesystem::path& source_dir,
                                     const ColumnMap& map, ImageStore& store,
                                     const IngestOptions& opts);

DatasetSplit ingest_visualnews_corpus(const std::filesystem::path& source_dir,
                                      const ColumnMap& map, ImageStore& store,
                                      const IngestOptions& opts);

}  // namespace mmfnd::ingest
