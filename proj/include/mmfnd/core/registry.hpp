#pragma once

#include <span>
#include <string>
#include <vector>

#include "mmfnd/core/types.hpp"

namespace mmfnd {

// Builds a split from posts, recomputing label counts. Throws
// DuplicateIdError when two posts share an id. A zero-post split is legal
// but logged as a warning.
DatasetSplit register_split(std::string name, std::vector<Post> posts);

// Order-preserving union: splits concatenated in the given order, counts
// summed. Throws DuplicateIdError when ids collide across inputs.
DatasetSplit merge_splits(std::span<const DatasetSplit> splits, std::string name);

}  // namespace mmfnd
