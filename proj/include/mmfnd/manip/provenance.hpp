#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmfnd/core/types.hpp"

namespace mmfnd::manip {

// One line of the provenance sidecar: the derived post and how it was made.
struct ProvenanceEntry {
  std::string post_id;
  ManipulationRecord record;

  bool operator==(const ProvenanceEntry&) const = default;
};

// JSON-lines sidecar, one entry per derived post, in post order.
void write_provenance(const std::vector<ProvenanceEntry>& entries,
                      const std::filesystem::path& path);
std::vector<ProvenanceEntry> read_provenance(const std::filesystem::path& path);

}  // namespace mmfnd::manip
