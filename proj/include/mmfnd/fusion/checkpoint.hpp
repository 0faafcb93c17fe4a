#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmfnd/fusion/model.hpp"

namespace mmfnd::fusion {

// A trained model frozen to disk: enough header to rebuild the architecture
// and refuse mismatched embeddings, plus every parameter tensor in float64.
struct Checkpoint {
  FusionModelConfig model_config;
  std::string text_encoder;
  std::string image_encoder;
  std::uint64_t seed = 0;
  int epoch = 0;
  double val_loss = 0.0;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;

  static Checkpoint capture(FusionModel& model, const std::string& text_encoder,
                            const std::string& image_encoder, std::uint64_t seed, int epoch,
                            double val_loss);
};

// Binary image of the checkpoint; save/load round-trips bitwise.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// SHA-256 of the serialized image; two identically seeded runs match here.
std::string checkpoint_hash(const Checkpoint& ckpt);

// Rebuilds the model and installs the stored tensors (names must cover the
// architecture's parameter list exactly).
std::unique_ptr<FusionModel> model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace mmfnd::fusion
