#include "mmfnd/manip/techniques.hpp"

#include <algorithm>
#include <cctype>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/rng.hpp"

namespace mmfnd::manip {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Applies replacements right-to-left so earlier offsets stay valid.
std::string apply_replacements(const std::string& text,
                               std::vector<TextReplacement> replacements) {
  std::sort(replacements.begin(), replacements.end(),
            [](const TextReplacement& a, const TextReplacement& b) { return a.start > b.start; });
  std::string out = text;
  for (const TextReplacement& r : replacements) {
    out.replace(r.start, r.end - r.start, r.new_surface);
  }
  return out;
}

bool is_dangling_punct(char c) {
  return c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?';
}

std::string collapse_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char c : text) {
    const bool space = (c == ' ' || c == '\t');
    if (space) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty() && c != '\n') out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  while (!out.empty() && (out.back() == ' ' || out.back() == '\n')) out.pop_back();
  std::size_t head = 0;
  while (head < out.size() && (out[head] == ' ' || out[head] == '\n')) ++head;
  return out.substr(head);
}

}  // namespace

const std::set<std::string>& replaceable_entity_types() {
  static const std::set<std::string> kTypes = {
      "person", "location", "organization", "event", "date", "facility", "gpe"};
  return kTypes;
}

std::optional<Label> resulting_label_for(Technique technique) {
  switch (technique) {
    case Technique::EVT_REP:
    case Technique::FAKE_IM:
    case Technique::ENTITY_REP:
      return Label::FAKE;
    case Technique::REAL_IM:
      return Label::REAL;
    case Technique::EVT_REM:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string derived_post_id(const std::string& source_id, Technique technique) {
  return source_id + "!" + std::string(to_string(technique));
}

Manipulated event_replace(const Post& post, const AliasTable& aliases,
                          std::span<const std::string> event_pool, std::uint64_t seed) {
  if (!post.event_id) {
    throw EventNotInTextError("post '" + post.id + "' has no event metadata");
  }
  std::vector<std::string> candidates;
  for (const std::string& event : event_pool) {
    if (event != *post.event_id) candidates.push_back(event);
  }
  if (candidates.empty()) {
    throw EmptyPoolError("no replacement event differs from '" + *post.event_id + "'");
  }
  auto matches = aliases.find_occurrences(post.text, *post.event_id);
  if (matches.empty()) {
    throw EventNotInTextError("no alias of '" + *post.event_id + "' occurs in post '" +
                              post.id + "'");
  }

  Rng rng(seed);
  const std::string& target = candidates[rng.uniform_index(candidates.size())];
  const std::string target_surface = aliases.canonical_surface(target);

  ManipulationRecord record;
  record.technique = Technique::EVT_REP;
  record.source_id = post.id;
  record.seed = seed;
  record.resulting_label = Label::FAKE;
  for (const AliasMatch& m : matches) {
    record.text_replacements.push_back({m.start, m.end, m.surface, target_surface});
  }

  Post out = post;
  out.id = derived_post_id(post.id, Technique::EVT_REP);
  out.text = apply_replacements(post.text, record.text_replacements);
  out.event_id = target;
  out.label = Label::FAKE;
  out.derived_from = record.reference();
  return {std::move(out), std::move(record)};
}

Manipulated event_remove(const Post& post, const AliasTable& aliases) {
  if (!post.event_id) {
    throw EventNotInTextError("post '" + post.id + "' has no event metadata");
  }
  auto matches = aliases.find_occurrences(post.text, *post.event_id);
  if (matches.empty()) {
    throw EventNotInTextError("no alias of '" + *post.event_id + "' occurs in post '" +
                              post.id + "'");
  }

  ManipulationRecord record;
  record.technique = Technique::EVT_REM;
  record.source_id = post.id;
  for (const AliasMatch& m : matches) {
    record.text_replacements.push_back({m.start, m.end, m.surface, ""});
  }

  // Delete right-to-left, eating dangling punctuation that the removal
  // strands ("at ," -> "at").
  std::string text = post.text;
  for (auto it = matches.rbegin(); it != matches.rend(); ++it) {
    std::size_t cut_end = it->end;
    std::size_t probe = cut_end;
    while (probe < text.size() && text[probe] == ' ') ++probe;
    if (probe < text.size() && is_dangling_punct(text[probe])) cut_end = probe + 1;
    text.erase(it->start, cut_end - it->start);
  }
  text = collapse_whitespace(text);
  if (text.empty()) {
    throw EmptyTextAfterRemovalError("post '" + post.id + "' is only its event surface");
  }

  Post out = post;
  out.id = derived_post_id(post.id, Technique::EVT_REM);
  out.text = std::move(text);
  out.event_id.reset();  // the event is gone from the text and the metadata
  out.derived_from = record.reference();
  // out.label keeps the source value as a placeholder; the manifest must not
  // be written before import_annotations overwrites it.
  return {std::move(out), std::move(record)};
}

std::string event_key_of(const Post& post) {
  return post.event_id ? *post.event_id : post.id;
}

Manipulated fake_image_replace(const Post& post, std::span<const ImagePoolEntry> pool,
                               std::uint64_t seed) {
  const std::string own_key = event_key_of(post);
  std::vector<const ImagePoolEntry*> candidates;
  for (const ImagePoolEntry& entry : pool) {
    if (entry.event_key != own_key) candidates.push_back(&entry);
  }
  if (candidates.empty()) {
    throw EmptyPoolError("no pool image depicts an event other than '" + own_key + "'");
  }
  Rng rng(seed);
  const ImagePoolEntry& chosen = *candidates[rng.uniform_index(candidates.size())];

  ManipulationRecord record;
  record.technique = Technique::FAKE_IM;
  record.source_id = post.id;
  record.seed = seed;
  record.resulting_label = Label::FAKE;
  record.image_replacement = ImageReplacement{post.image_ref, chosen.image_ref};

  Post out = post;
  out.id = derived_post_id(post.id, Technique::FAKE_IM);
  out.image_ref = chosen.image_ref;
  out.label = Label::FAKE;
  out.derived_from = record.reference();
  return {std::move(out), std::move(record)};
}

Manipulated real_image_replace(const Post& post, const CuratedMap& curated) {
  auto it = curated.find(post.id);
  if (it == curated.end()) {
    throw MissingCurationError("post '" + post.id + "' has no curated image");
  }
  if (it->second.event_id != post.event_id) {
    throw EventMismatchError("curated image for post '" + post.id +
                             "' depicts a different event");
  }

  ManipulationRecord record;
  record.technique = Technique::REAL_IM;
  record.source_id = post.id;
  record.resulting_label = Label::REAL;
  record.image_replacement = ImageReplacement{post.image_ref, it->second.image_ref};

  Post out = post;
  out.id = derived_post_id(post.id, Technique::REAL_IM);
  out.image_ref = it->second.image_ref;
  out.label = Label::REAL;
  out.derived_from = record.reference();
  return {std::move(out), std::move(record)};
}

std::optional<Manipulated> entity_replace(const Post& post, EntityTagger& tagger,
                                          const EntityIndex& index, std::uint64_t seed) {
  std::vector<EntitySpan> spans;
  for (EntitySpan& s : tagger.tag(post.text)) {
    if (replaceable_entity_types().count(s.entity_type)) spans.push_back(std::move(s));
  }
  if (spans.empty()) return std::nullopt;

  Rng rng(seed);
  // Within one post, same-type draws go without replacement until the pool
  // runs dry, then fall back to with-replacement.
  std::map<std::string, std::set<std::string>> used;
  ManipulationRecord record;
  record.technique = Technique::ENTITY_REP;
  record.source_id = post.id;
  record.seed = seed;
  record.resulting_label = Label::FAKE;

  // Right-to-left so offsets stay valid while rewriting.
  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    const EntitySpan& span = *it;
    auto pool_it = index.find(span.entity_type);
    if (pool_it == index.end()) continue;  // type exhausted: span stays
    const std::string original = lower(span.surface);
    std::vector<const std::string*> fresh;
    std::vector<const std::string*> any;
    for (const std::string& surface : pool_it->second) {
      if (lower(surface) == original) continue;
      any.push_back(&surface);
      if (!used[span.entity_type].count(surface)) fresh.push_back(&surface);
    }
    const auto& candidates = fresh.empty() ? any : fresh;
    if (candidates.empty()) continue;  // only the original exists: span stays
    const std::string& replacement = *candidates[rng.uniform_index(candidates.size())];
    used[span.entity_type].insert(replacement);
    record.text_replacements.push_back({span.start, span.end, span.surface, replacement});
  }
  if (record.text_replacements.empty()) return std::nullopt;  // nothing replaceable
  std::reverse(record.text_replacements.begin(), record.text_replacements.end());

  Post out = post;
  out.id = derived_post_id(post.id, Technique::ENTITY_REP);
  out.text = apply_replacements(post.text, record.text_replacements);
  out.label = Label::FAKE;
  out.derived_from = record.reference();
  return Manipulated{std::move(out), std::move(record)};
}

void PendingAnnotationSet::add(std::string post_id) { pending_.insert(std::move(post_id)); }

bool PendingAnnotationSet::pending(const std::string& post_id) const {
  return pending_.count(post_id) != 0;
}

std::vector<std::string> PendingAnnotationSet::ids() const {
  return {pending_.begin(), pending_.end()};
}

std::size_t PendingAnnotationSet::import_annotations(
    std::span<const std::pair<std::string, Label>> rows, DatasetSplit& split,
    std::vector<ManipulationRecord>* records) {
  std::size_t applied = 0;
  for (const auto& [post_id, label] : rows) {
    auto post = std::find_if(split.posts.begin(), split.posts.end(),
                             [&](const Post& p) { return p.id == post_id; });
    if (post == split.posts.end()) {
      throw UnknownIdError("annotation names unknown post '" + post_id + "'");
    }
    if (!pending_.erase(post_id)) {
      throw NotPendingError("post '" + post_id + "' is not awaiting a label");
    }
    post->label = label;
    if (records) {
      const std::size_t i = static_cast<std::size_t>(post - split.posts.begin());
      if (i < records->size()) (*records)[i].resulting_label = label;
    }
    ++applied;
  }
  split.fake_count = split.real_count = 0;
  for (const Post& p : split.posts) {
    (p.label == Label::FAKE ? split.fake_count : split.real_count)++;
  }
  return applied;
}

}  // namespace mmfnd::manip
