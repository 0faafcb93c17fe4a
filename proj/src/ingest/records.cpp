#include "mmfnd/ingest/records.hpp"

#include <algorithm>
#include <iostream>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/registry.hpp"

namespace mmfnd::ingest {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Permissive mode logs and lets the caller skip; strict mode throws.
void report_bad_record(const std::string& what, bool permissive) {
  if (!permissive) throw MalformedRecordError(what);
  std::cerr << "[mmfnd] ingest: skipping record: " << what << "\n";
}

}  // namespace

Label veracity_to_label(const std::string& tag, bool humor_is_fake) {
  const std::string t = lower(tag);
  if (t == "fake" || t == "false") return Label::FAKE;
  if (t == "real" || t == "true") return Label::REAL;
  if (t == "humor" || t == "humour") {
    if (humor_is_fake) return Label::FAKE;
    return Label::REAL;
  }
  throw UnknownVeracityTagError("'" + tag + "'");
}

DatasetSplit ingest_tweets(const std::vector<RawTweetRecord>& records,
                           ImageLocator& images, const IngestOptions& opts,
                           std::string split_name) {
  std::vector<Post> posts;
  for (const RawTweetRecord& rec : records) {
    if (rec.media_type == MediaType::VIDEO) continue;
    if (rec.tweet_id.empty() || rec.tweet_text.empty() || rec.media_ids.empty() ||
        rec.veracity_tag.empty()) {
      report_bad_record("tweet '" + rec.tweet_id + "' misses a required field",
                        opts.permissive);
      continue;
    }
    Label label;
    try {
      label = veracity_to_label(rec.veracity_tag, opts.humor_is_fake);
    } catch (const UnknownVeracityTagError& e) {
      if (opts.permissive) {
        std::cerr << "[mmfnd] ingest: skipping tweet '" << rec.tweet_id
                  << "': " << e.what() << "\n";
        continue;
      }
      throw;
    }
    // One post per (tweet, image) pair, sharing the tweet text.
    std::size_t pair_index = 0;
    for (const std::string& media_id : rec.media_ids) {
      auto ref = images.locate(media_id);
      if (!ref) continue;  // image not available anymore
      Post p;
      p.id = namespaced_id(opts.origin, rec.tweet_id) + "#" + std::to_string(pair_index++);
      p.text = rec.tweet_text;
      p.image_ref = *ref;
      if (!rec.event_tag.empty()) p.event_id = rec.event_tag;
      p.label = label;
      p.split = opts.split;
      p.origin = opts.origin;
      posts.push_back(std::move(p));
    }
  }
  return register_split(std::move(split_name), std::move(posts));
}

DatasetSplit ingest_captions(const std::vector<RawCaptionRecord>& records,
                             ImageLocator& images, const IngestOptions& opts,
                             std::string split_name) {
  std::vector<Post> posts;
  for (const RawCaptionRecord& rec : records) {
    if (rec.article_id.empty() || rec.caption.empty() || rec.image_path.empty()) {
      report_bad_record("caption record '" + rec.article_id + "' misses a required field",
                        opts.permissive);
      continue;
    }
    auto ref = images.locate(rec.image_path);
    if (!ref) continue;
    Post p;
    p.id = namespaced_id(opts.origin, rec.article_id);
    p.text = rec.caption;
    p.image_ref = *ref;
    p.label = Label::REAL;
    p.split = opts.split;
    p.origin = opts.origin;
    posts.push_back(std::move(p));
  }
  return register_split(std::move(split_name), std::move(posts));
}

}  // namespace mmfnd::ingest
