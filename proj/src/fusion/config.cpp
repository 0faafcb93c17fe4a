#include "mmfnd/fusion/config.hpp"

#include "mmfnd/core/errors.hpp"

namespace mmfnd::fusion {

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::BERT_RESNET:
      return "bert_resnet";
    case Architecture::MLP_CLIP:
      return "mlp_clip";
    case Architecture::CLIP_MMBT:
      return "clip_mmbt";
  }
  throw ConfigInvalidError("unknown architecture value");
}

Architecture architecture_from_string(const std::string& s) {
  if (s == "bert_resnet") return Architecture::BERT_RESNET;
  if (s == "mlp_clip") return Architecture::MLP_CLIP;
  if (s == "clip_mmbt") return Architecture::CLIP_MMBT;
  throw ConfigInvalidError("unknown architecture: " + s);
}

std::string to_string(OutputMode mode) {
  return mode == OutputMode::TWO_UNIT_SIGMOID ? "two_unit_sigmoid" : "one_unit_sigmoid";
}

OutputMode output_mode_from_string(const std::string& s) {
  if (s == "two_unit_sigmoid") return OutputMode::TWO_UNIT_SIGMOID;
  if (s == "one_unit_sigmoid") return OutputMode::ONE_UNIT_SIGMOID;
  throw ConfigInvalidError("unknown output mode: " + s);
}

std::string to_string(Act act) {
  switch (act) {
    case Act::NONE:
      return "none";
    case Act::RELU:
      return "relu";
    case Act::GELU:
      return "gelu";
    case Act::SIGMOID:
      return "sigmoid";
  }
  throw ConfigInvalidError("unknown activation value");
}

Act act_from_string(const std::string& s) {
  if (s == "none") return Act::NONE;
  if (s == "relu") return Act::RELU;
  if (s == "gelu") return Act::GELU;
  if (s == "sigmoid") return Act::SIGMOID;
  throw ConfigInvalidError("unknown activation: " + s);
}

FusionModelConfig FusionModelConfig::preset(Architecture arch, int text_dim, int image_dim) {
  FusionModelConfig cfg;
  cfg.architecture = arch;
  cfg.text_dim = text_dim;
  cfg.image_dim = image_dim;
  switch (arch) {
    case Architecture::BERT_RESNET:
      cfg.proj_dims = {256, 256};
      cfg.proj_activation = Act::GELU;
      cfg.fusion_dim = 128;
      cfg.fusion_activation = Act::RELU;
      cfg.output_mode = OutputMode::TWO_UNIT_SIGMOID;
      break;
    case Architecture::MLP_CLIP:
      cfg.proj_dims = {256, 128};
      cfg.proj_activation = Act::RELU;
      cfg.fusion_dim = 0;
      cfg.output_mode = OutputMode::TWO_UNIT_SIGMOID;
      break;
    case Architecture::CLIP_MMBT:
      cfg.proj_dims = {};
      cfg.fusion_dim = 0;
      cfg.output_mode = OutputMode::ONE_UNIT_SIGMOID;
      break;
  }
  return cfg;
}

nlohmann::json FusionModelConfig::to_json() const {
  nlohmann::json j{{"architecture", to_string(architecture)},
                   {"text_dim", text_dim},
                   {"image_dim", image_dim},
                   {"proj_dims", proj_dims},
                   {"proj_activation", to_string(proj_activation)},
                   {"fusion_dim", fusion_dim},
                   {"fusion_activation", to_string(fusion_activation)},
                   {"output_mode", to_string(output_mode)}};
  if (architecture == Architecture::CLIP_MMBT) {
    j["mmbt"] = {{"vocab_size", mmbt.vocab_size},   {"max_seq", mmbt.max_seq},
                 {"d_model", mmbt.d_model},         {"num_heads", mmbt.num_heads},
                 {"num_layers", mmbt.num_layers},   {"ff_dim", mmbt.ff_dim},
                 {"image_prefix_tokens", mmbt.image_prefix_tokens}};
  }
  return j;
}

FusionModelConfig FusionModelConfig::from_json(const nlohmann::json& j) {
  FusionModelConfig cfg;
  try {
    cfg.architecture = architecture_from_string(j.at("architecture").get<std::string>());
    cfg.text_dim = j.at("text_dim").get<int>();
    cfg.image_dim = j.at("image_dim").get<int>();
    cfg.proj_dims = j.at("proj_dims").get<std::vector<int>>();
    cfg.proj_activation = act_from_string(j.at("proj_activation").get<std::string>());
    cfg.fusion_dim = j.at("fusion_dim").get<int>();
    cfg.fusion_activation = act_from_string(j.at("fusion_activation").get<std::string>());
    cfg.output_mode = output_mode_from_string(j.at("output_mode").get<std::string>());
    if (j.contains("mmbt")) {
      const auto& m = j.at("mmbt");
      cfg.mmbt.vocab_size = m.at("vocab_size").get<int>();
      cfg.mmbt.max_seq = m.at("max_seq").get<int>();
      cfg.mmbt.d_model = m.at("d_model").get<int>();
      cfg.mmbt.num_heads = m.at("num_heads").get<int>();
      cfg.mmbt.num_layers = m.at("num_layers").get<int>();
      cfg.mmbt.ff_dim = m.at("ff_dim").get<int>();
      cfg.mmbt.image_prefix_tokens = m.at("image_prefix_tokens").get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalidError(std::string("bad fusion model config: ") + e.what());
  }
  if (cfg.text_dim <= 0 || cfg.image_dim <= 0)
    throw ConfigInvalidError("fusion model config requires positive input dims");
  return cfg;
}

TrainingConfig TrainingConfig::preset(Architecture arch, std::uint64_t seed) {
  TrainingConfig cfg;
  cfg.seed = seed;
  cfg.learning_rate = arch == Architecture::CLIP_MMBT ? 2e-5 : 1e-3;
  return cfg;
}

}  // namespace mmfnd::fusion
