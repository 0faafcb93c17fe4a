#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mmfnd/core/types.hpp"

namespace mmfnd::pipeline {

// The three training-corpus compositions: originals plus image
// manipulations, originals plus text manipulations, or everything.
enum class VnmeVariant { IMG, EVT, ALL };

std::string_view to_string(VnmeVariant v);
VnmeVariant vnme_variant_from_string(std::string_view s);

// Whether a derived row produced by this technique belongs to the variant.
// Event/entity replacement count as text manipulations, fake-image
// replacement as the image manipulation; event-removal and real-image rows
// are evaluation-only and belong to no training composition.
bool vnme_admits(VnmeVariant variant, Technique technique);

// Order-preserving selection over the concatenated sources: original rows
// always pass, derived rows pass per vnme_admits. Throws
// MissingDerivedSplitError when a manipulation family the variant requires
// is absent, and DuplicateIdError on id collisions across sources.
DatasetSplit compose_vnme(std::span<const DatasetSplit> sources, VnmeVariant variant,
                          std::string name);

struct VnmePaths {
  std::filesystem::path img;
  std::filesystem::path evt;
  std::filesystem::path all;
};

// Reads the input manifests and writes vnme-{img,evt,all}.manifest.tsv
// under out_dir.
VnmePaths make_vnme(std::span<const std::filesystem::path> manifests,
                    const std::filesystem::path& out_dir);

}  // namespace mmfnd::pipeline
