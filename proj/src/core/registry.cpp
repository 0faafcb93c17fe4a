#include "mmfnd/core/registry.hpp"

#include <iostream>
#include <unordered_set>

#include "mmfnd/core/errors.hpp"

namespace mmfnd {

DatasetSplit register_split(std::string name, std::vector<Post> posts) {
  DatasetSplit split;
  split.name = std::move(name);
  if (posts.empty()) {
    std::cerr << "[mmfnd] warning: split '" << split.name << "' is empty\n";
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(posts.size());
  for (const Post& post : posts) {
    if (!seen.insert(post.id).second) {
      throw DuplicateIdError("post id '" + post.id + "' occurs twice in split '" +
                             split.name + "'");
    }
    if (post.label == Label::FAKE) {
      ++split.fake_count;
    } else {
      ++split.real_count;
    }
  }
  split.posts = std::move(posts);
  return split;
}

DatasetSplit merge_splits(std::span<const DatasetSplit> splits, std::string name) {
  std::vector<Post> merged;
  std::size_t total = 0;
  for (const DatasetSplit& s : splits) total += s.posts.size();
  merged.reserve(total);
  for (const DatasetSplit& s : splits) {
    merged.insert(merged.end(), s.posts.begin(), s.posts.end());
  }
  return register_split(std::move(name), std::move(merged));
}

}  // namespace mmfnd
