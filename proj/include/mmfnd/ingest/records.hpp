#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmfnd/core/types.hpp"

namespace mmfnd::ingest {

enum class MediaType { IMAGE, VIDEO };

// One row of a MediaEval-style tweet file before filtering.
struct RawTweetRecord {
  std::string tweet_id;
  std::string tweet_text;
  std::vector<std::string> media_ids;
  MediaType media_type = MediaType::IMAGE;
  std::string event_tag;
  std::string veracity_tag;
};

// One entry of a VisualNews-style metadata file.
struct RawCaptionRecord {
  std::string article_id;
  std::string caption;
  std::string image_path;
  std::string source;
  std::optional<std::string> topic;
};

// Answers existence queries against an image source and yields the canonical
// store ref for a resolvable media id. nullopt means the image is gone.
class ImageLocator {
 public:
  virtual ~ImageLocator() = default;
  virtual std::optional<std::string> locate(const std::string& media_id) = 0;
};

struct IngestOptions {
  Origin origin = Origin::SYNTHETIC;
  Split split = Split::TRAIN;
  // Skip-with-log instead of hard-failing on bad records.
  bool permissive = false;
  // The task convention treats the MediaEval "humor" tag as fake.
  bool humor_is_fake = true;
};

// Applies the filtering rules: drop video tweets and tweets whose image no
// longer resolves; expand multi-image tweets into one post per (tweet, image)
// pair with ids "<origin>/<tweet_id>#<k>".
DatasetSplit ingest_tweets(const std::vector<RawTweetRecord>& records,
                           ImageLocator& images, const IngestOptions& opts,
                           std::string split_name = "tweets");

// Caption corpora are all-real; every resolvable record becomes a REAL post
// with no event metadata.
DatasetSplit ingest_captions(const std::vector<RawCaptionRecord>& records,
                             ImageLocator& images, const IngestOptions& opts,
                             std::string split_name = "captions");

Label veracity_to_label(const std::string& tag, bool humor_is_fake);

}  // namespace mmfnd::ingest
