#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmfnd/fusion/nn.hpp"

namespace mmfnd::fusion {

enum class Architecture { BERT_RESNET, MLP_CLIP, CLIP_MMBT };
enum class OutputMode { TWO_UNIT_SIGMOID, ONE_UNIT_SIGMOID };

std::string to_string(Architecture arch);
Architecture architecture_from_string(const std::string& s);
std::string to_string(OutputMode mode);
OutputMode output_mode_from_string(const std::string& s);
std::string to_string(Act act);
Act act_from_string(const std::string& s);

// Transformer hyperparameters for the MMBT head. The published fusion method
// rides on a full-size language model; this implementation keeps the same
// wiring at configurable width so it trains on one core.
struct MmbtConfig {
  int vocab_size = 512;   // hash-bucket count, excludes specials
  int max_seq = 64;       // total positions incl. image prefix and separators
  int d_model = 96;
  int num_heads = 4;
  int num_layers = 2;
  int ff_dim = 192;
  int image_prefix_tokens = 3;  // N

  bool operator==(const MmbtConfig&) const = default;
};

struct FusionModelConfig {
  Architecture architecture = Architecture::MLP_CLIP;
  int text_dim = 0;   // encoder output dims this head expects
  int image_dim = 0;
  std::vector<int> proj_dims;       // per-modality stack, applied to both branches
  Act proj_activation = Act::RELU;  // activation schedule for proj_dims
  int fusion_dim = 0;               // post-concat hidden layer; 0 = none
  Act fusion_activation = Act::RELU;
  OutputMode output_mode = OutputMode::TWO_UNIT_SIGMOID;
  MmbtConfig mmbt;  // used only by CLIP_MMBT

  static FusionModelConfig preset(Architecture arch, int text_dim, int image_dim);

  nlohmann::json to_json() const;
  static FusionModelConfig from_json(const nlohmann::json& j);
  bool operator==(const FusionModelConfig&) const = default;
};

enum class Selection { BEST_VAL_LOSS };

struct TrainingConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  Selection selection = Selection::BEST_VAL_LOSS;
  bool class_weights = false;

  // Head-only paths train at 1e-3; transformer-parameter paths at 2e-5.
  static TrainingConfig preset(Architecture arch, std::uint64_t seed);
};

}  // namespace mmfnd::fusion
