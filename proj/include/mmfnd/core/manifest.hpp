#pragma once

#include <filesystem>
#include <string>

#include "mmfnd/core/types.hpp"

namespace mmfnd {

// Canonical on-disk dataset manifest: UTF-8, tab-separated, one record per
// line, header row required. Field values escape backslash, tab, newline and
// carriage return so arbitrary text round-trips byte-exactly.
//
//   id  text  image_ref  event_id  label  split  origin  derived_from
//
// Empty optional fields are written as the empty string.

inline constexpr std::string_view kManifestHeader =
    "id\ttext\timage_ref\tevent_id\tlabel\tsplit\torigin\tderived_from";

std::string escape_manifest_field(std::string_view raw);
std::string unescape_manifest_field(std::string_view escaped);

void write_manifest(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit read_manifest(const std::filesystem::path& path);
DatasetSplit read_manifest(const std::filesystem::path& path, std::string name);

// Subset of a manifest by split tag, preserving order.
DatasetSplit filter_split(const DatasetSplit& all, Split which);
DatasetSplit filter_label(const DatasetSplit& all, Label which);

}  // namespace mmfnd
