#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmfnd/core/image_store.hpp"
#include "mmfnd/core/types.hpp"

namespace mmfnd::encode {

enum class Modality { TEXT, IMAGE, JOINT };

struct EncoderSpec {
  std::string name;
  Modality modality = Modality::TEXT;
  int output_dim = 0;
  int max_text_tokens = 0;  // text/joint
  int image_side = 0;       // image/joint

  // Registered presets: "text-transformer" (768), "image-residual" (2048),
  // "joint-contrastive" (512/512), "joint-contrastive-large" (640, wider
  // image tower; dim taken from the encoder's own release notes).
  static EncoderSpec preset(const std::string& name);
  static std::vector<std::string> preset_names();
  // Desk-scale spec: mock-<modality>-<dim>.
  static EncoderSpec mock(Modality modality, int dim);
};

struct EmbeddingPair {
  std::string post_id;
  std::vector<float> text_vec;
  std::vector<float> image_vec;
  std::string text_encoder;
  std::string image_encoder;

  bool operator==(const EmbeddingPair&) const = default;
};

// One modality encoder. Implementations are pure in content; the post id
// travels along for id-keyed backends. Calls are counted so tests can prove
// a cache hit did not re-encode.
class Encoder {
 public:
  explicit Encoder(EncoderSpec spec) : spec_(std::move(spec)) {}
  virtual ~Encoder() = default;

  const EncoderSpec& spec() const { return spec_; }
  std::size_t call_count() const { return calls_; }

  std::vector<float> encode_text(const std::string& post_id, const std::string& text) {
    ++calls_;
    return do_encode_text(post_id, text);
  }
  std::vector<float> encode_image(const std::string& post_id,
                                  const std::vector<std::uint8_t>& bytes) {
    ++calls_;
    return do_encode_image(post_id, bytes);
  }

 protected:
  virtual std::vector<float> do_encode_text(const std::string& post_id,
                                            const std::string& text) = 0;
  virtual std::vector<float> do_encode_image(const std::string& post_id,
                                             const std::vector<std::uint8_t>& bytes) = 0;

 private:
  EncoderSpec spec_;
  std::size_t calls_ = 0;
};

struct MockOptions {
  std::uint64_t seed = 0;
  // Planted-pair mode: content carrying a pairing key gets an embedding
  // pulled toward a key-specific direction, so text/image vectors of a
  // matching pair correlate and manipulated pairs decorrelate.
  bool planted_pairs = true;
  double signal_alpha = 0.85;  // weight of the key direction (0..1)
};

// Throws EncoderUnavailableError for pretrained presets (no model runtime
// ships with this toolkit; use --mock or a precomputed cache).
std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec,
                                      const MockOptions& mock_options = {},
                                      bool allow_mock = true);

// "jpeg", "png", "gif", "ppm" — or nullopt for bytes no decoder would take.
std::optional<std::string> sniff_image_format(const std::vector<std::uint8_t>& bytes);

// Encodes every post, order-preserving. Posts whose image is missing or
// undecodable are dropped with a log line; dropped ids are appended to
// *dropped when given.
std::vector<EmbeddingPair> encode_batch(const DatasetSplit& split, const ImageStore& images,
                                        Encoder& text_encoder, Encoder& image_encoder,
                                        std::vector<std::string>* dropped = nullptr);

}  // namespace mmfnd::encode
