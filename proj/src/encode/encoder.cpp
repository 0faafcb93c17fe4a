#include "mmfnd/encode/encoder.hpp"

#include <iostream>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/encode/mock_encoder.hpp"

namespace mmfnd::encode {

EncoderSpec EncoderSpec::preset(const std::string& name) {
  // Published token/pixel budgets of the respective model families.
  if (name == "text-transformer") return {name, Modality::TEXT, 768, 512, 0};
  if (name == "image-residual") return {name, Modality::IMAGE, 2048, 0, 224};
  if (name == "joint-contrastive") return {name, Modality::JOINT, 512, 77, 224};
  // Wider image tower; 640 comes from the encoder release, the paper does
  // not restate it.
  if (name == "joint-contrastive-large") return {name, Modality::JOINT, 640, 77, 288};
  if (name.rfind("mock-", 0) == 0) {
    const auto second_dash = name.find('-', 5);
    if (second_dash != std::string::npos) {
      const std::string modality = name.substr(5, second_dash - 5);
      const int dim = std::stoi(name.substr(second_dash + 1));
      if (modality == "text") return mock(Modality::TEXT, dim);
      if (modality == "image") return mock(Modality::IMAGE, dim);
      if (modality == "joint") return mock(Modality::JOINT, dim);
    }
  }
  throw ConfigInvalidError("unknown encoder preset '" + name + "'");
}

std::vector<std::string> EncoderSpec::preset_names() {
  return {"text-transformer", "image-residual", "joint-contrastive",
          "joint-contrastive-large"};
}

EncoderSpec EncoderSpec::mock(Modality modality, int dim) {
  if (dim <= 0) throw ConfigInvalidError("mock encoder dim must be positive");
  const char* tag = modality == Modality::TEXT    ? "text"
                    : modality == Modality::IMAGE ? "image"
                                                  : "joint";
  return {"mock-" + std::string(tag) + "-" + std::to_string(dim), modality, dim, 512, 64};
}

std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec, const MockOptions& mock_options,
                                      bool allow_mock) {
  if (spec.name.rfind("mock-", 0) == 0) {
    if (!allow_mock) throw ConfigInvalidError("mock encoders are disabled here");
    return std::make_unique<MockEncoder>(spec, mock_options);
  }
  throw EncoderUnavailableError(
      "no model runtime for preset '" + spec.name +
      "' ships with this toolkit; pass --mock for synthetic runs or point the "
      "pipeline at a precomputed embedding cache");
}

std::optional<std::string> sniff_image_format(const std::vector<std::uint8_t>& bytes) {
  auto starts_with = [&](std::string_view magic) {
    if (bytes.size() < magic.size()) return false;
    return std::equal(magic.begin(), magic.end(), bytes.begin(),
                      [](char m, std::uint8_t b) {
                        return static_cast<std::uint8_t>(m) == b;
                      });
  };
  if (starts_with("\xFF\xD8\xFF")) return "jpeg";
  if (starts_with("\x89PNG\r\n\x1a\n")) return "png";
  if (starts_with("GIF87a") || starts_with("GIF89a")) return "gif";
  if ((starts_with("P6") || starts_with("P3")) && bytes.size() > 2 &&
      (bytes[2] == '\n' || bytes[2] == ' ' || bytes[2] == '\r' || bytes[2] == '\t')) {
    return "ppm";
  }
  return std::nullopt;
}

std::vector<EmbeddingPair> encode_batch(const DatasetSplit& split, const ImageStore& images,
                                        Encoder& text_encoder, Encoder& image_encoder,
                                        std::vector<std::string>* dropped) {
  std::vector<EmbeddingPair> pairs;
  pairs.reserve(split.size());
  auto drop = [&](const Post& post, const std::string& why) {
    std::cerr << "[mmfnd] encode: dropping '" << post.id << "': " << why << "\n";
    if (dropped) dropped->push_back(post.id);
  };
  for (const Post& post : split.posts) {
    std::vector<std::uint8_t> bytes;
    try {
      bytes = images.read(post.image_ref);
    } catch (const MissingImageError& e) {
      drop(post, e.what());
      continue;
    }
    if (!sniff_image_format(bytes)) {
      drop(post, "image bytes are not a decodable format");
      continue;
    }
    EmbeddingPair pair;
    pair.post_id = post.id;
    pair.text_vec = text_encoder.encode_text(post.id, post.text);
    pair.image_vec = image_encoder.encode_image(post.id, bytes);
    pair.text_encoder = text_encoder.spec().name;
    pair.image_encoder = image_encoder.spec().name;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace mmfnd::encode
