#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mmfnd/encode/encoder.hpp"

namespace mmfnd::encode {

// First pairing key in the content, lowercased: "evt-" followed by
// alphanumerics, case-insensitive, matched in text and raw image bytes
// alike (fixtures carry it in a PPM comment).
std::optional<std::string> extract_planted_key(std::string_view content);

// Deterministic hash-based encoder. Without planted pairs the vector is a
// pure content hash; with them it mixes a key direction shared across
// modalities with content noise:
//   v = sqrt(alpha) * u_key + sqrt(1 - alpha) * u_noise,   ||v|| = 1.
class MockEncoder : public Encoder {
 public:
  MockEncoder(EncoderSpec spec, MockOptions options);

  // Exposed for the Monte-Carlo oracle in tests.
  std::vector<float> key_direction(const std::string& key) const;

 protected:
  std::vector<float> do_encode_text(const std::string& post_id,
                                    const std::string& text) override;
  std::vector<float> do_encode_image(const std::string& post_id,
                                     const std::vector<std::uint8_t>& bytes) override;

 private:
  std::vector<float> encode_content(std::string_view content, std::string_view modality);

  MockOptions options_;
};

}  // namespace mmfnd::encode
