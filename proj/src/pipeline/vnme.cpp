#include "mmfnd/pipeline/vnme.hpp"

#include <optional>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/manifest.hpp"
#include "mmfnd/core/registry.hpp"

namespace mmfnd::pipeline {

namespace {

std::optional<Technique> technique_of(const Post& post) {
  if (!post.derived_from) return std::nullopt;
  const auto colon = post.derived_from->find(':');
  if (colon == std::string::npos) {
    throw MalformedRecordError("derived_from without technique prefix: " +
                               *post.derived_from + " (post " + post.id + ")");
  }
  return technique_from_string(post.derived_from->substr(0, colon));
}

}  // namespace

std::string_view to_string(VnmeVariant v) {
  switch (v) {
    case VnmeVariant::IMG: return "img";
    case VnmeVariant::EVT: return "evt";
    case VnmeVariant::ALL: return "all";
  }
  return "?";
}

VnmeVariant vnme_variant_from_string(std::string_view s) {
  if (s == "img") return VnmeVariant::IMG;
  if (s == "evt") return VnmeVariant::EVT;
  if (s == "all") return VnmeVariant::ALL;
  throw ConfigInvalidError("unknown vnme variant: " + std::string(s));
}

bool vnme_admits(VnmeVariant variant, Technique technique) {
  const bool text_manip =
      technique == Technique::EVT_REP || technique == Technique::ENTITY_REP;
  const bool image_manip = technique == Technique::FAKE_IM;
  switch (variant) {
    case VnmeVariant::IMG: return image_manip;
    case VnmeVariant::EVT: return text_manip;
    case VnmeVariant::ALL: return text_manip || image_manip;
  }
  return false;
}

DatasetSplit compose_vnme(std::span<const DatasetSplit> sources, VnmeVariant variant,
                          std::string name) {
  std::vector<Post> selected;
  bool saw_text_manip = false;
  bool saw_image_manip = false;
  for (const DatasetSplit& source : sources) {
    for (const Post& post : source.posts) {
      const auto technique = technique_of(post);
      if (!technique) {
        selected.push_back(post);
        continue;
      }
      saw_text_manip |= *technique == Technique::EVT_REP ||
                        *technique == Technique::ENTITY_REP;
      saw_image_manip |= *technique == Technique::FAKE_IM;
      if (vnme_admits(variant, *technique)) selected.push_back(post);
    }
  }
  const bool needs_text = variant != VnmeVariant::IMG;
  const bool needs_image = variant != VnmeVariant::EVT;
  if (needs_text && !saw_text_manip) {
    throw MissingDerivedSplitError("vnme-" + std::string(to_string(variant)) +
                                   " requires event/entity-replaced rows, none found");
  }
  if (needs_image && !saw_image_manip) {
    throw MissingDerivedSplitError("vnme-" + std::string(to_string(variant)) +
                                   " requires fake-image rows, none found");
  }
  return register_split(std::move(name), std::move(selected));
}

VnmePaths make_vnme(std::span<const std::filesystem::path> manifests,
                    const std::filesystem::path& out_dir) {
  std::vector<DatasetSplit> sources;
  sources.reserve(manifests.size());
  for (const auto& path : manifests) sources.push_back(read_manifest(path));

  std::filesystem::create_directories(out_dir);
  VnmePaths paths;
  paths.img = out_dir / "vnme-img.manifest.tsv";
  paths.evt = out_dir / "vnme-evt.manifest.tsv";
  paths.all = out_dir / "vnme-all.manifest.tsv";
  write_manifest(compose_vnme(sources, VnmeVariant::IMG, "vnme-img"), paths.img);
  write_manifest(compose_vnme(sources, VnmeVariant::EVT, "vnme-evt"), paths.evt);
  write_manifest(compose_vnme(sources, VnmeVariant::ALL, "vnme-all"), paths.all);
  return paths;
}

}  // namespace mmfnd::pipeline
