#include "mmfnd/encode/mock_encoder.hpp"

#include <cctype>
#include <cmath>

#include "mmfnd/core/hash.hpp"
#include "mmfnd/core/rng.hpp"

namespace mmfnd::encode {

namespace {

std::vector<float> unit_gaussian(std::uint64_t seed, int dim) {
  Rng rng(seed);
  std::vector<float> v(static_cast<std::size_t>(dim));
  double norm_sq = 0.0;
  for (float& x : v) {
    x = static_cast<float>(rng.normal());
    norm_sq += static_cast<double>(x) * x;
  }
  const double inv = 1.0 / std::sqrt(norm_sq > 0 ? norm_sq : 1.0);
  for (float& x : v) x = static_cast<float>(x * inv);
  return v;
}

void normalize(std::vector<float>& v) {
  double norm_sq = 0.0;
  for (float x : v) norm_sq += static_cast<double>(x) * x;
  const double inv = 1.0 / std::sqrt(norm_sq > 0 ? norm_sq : 1.0);
  for (float& x : v) x = static_cast<float>(x * inv);
}

}  // namespace

std::optional<std::string> extract_planted_key(std::string_view content) {
  constexpr std::string_view kPrefix = "evt-";
  for (std::size_t i = 0; i + kPrefix.size() < content.size(); ++i) {
    bool prefix = true;
    for (std::size_t k = 0; k < kPrefix.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(content[i + k])) != kPrefix[k]) {
        prefix = false;
        break;
      }
    }
    if (!prefix) continue;
    std::size_t end = i + kPrefix.size();
    while (end < content.size() &&
           std::isalnum(static_cast<unsigned char>(content[end]))) {
      ++end;
    }
    if (end == i + kPrefix.size()) continue;  // "evt-" with no key body
    std::string key(content.substr(i, end - i));
    for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return key;
  }
  return std::nullopt;
}

MockEncoder::MockEncoder(EncoderSpec spec, MockOptions options)
    : Encoder(std::move(spec)), options_(options) {}

std::vector<float> MockEncoder::key_direction(const std::string& key) const {
  // Seeded only by (key, dim): both modalities of a matching pair pull
  // toward the same direction.
  const std::uint64_t seed =
      derive_seed(0x706c616e746564ULL, key + "|" + std::to_string(spec().output_dim));
  return unit_gaussian(seed, spec().output_dim);
}

std::vector<float> MockEncoder::encode_content(std::string_view content,
                                               std::string_view modality) {
  const std::uint64_t noise_seed =
      derive_seed(options_.seed, std::string(modality) + "|" + sha256_hex(content));
  std::vector<float> noise = unit_gaussian(noise_seed, spec().output_dim);
  if (!options_.planted_pairs) return noise;
  const auto key = extract_planted_key(content);
  if (!key) return noise;

  const std::vector<float> anchor = key_direction(*key);
  const double a = std::sqrt(options_.signal_alpha);
  const double b = std::sqrt(1.0 - options_.signal_alpha);
  std::vector<float> v(noise.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<float>(a * anchor[i] + b * noise[i]);
  }
  normalize(v);
  return v;
}

std::vector<float> MockEncoder::do_encode_text(const std::string& /*post_id*/,
                                               const std::string& text) {
  return encode_content(text, "text");
}

std::vector<float> MockEncoder::do_encode_image(const std::string& /*post_id*/,
                                                const std::vector<std::uint8_t>& bytes) {
  return encode_content(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), "image");
}

}  // namespace mmfnd::encode
