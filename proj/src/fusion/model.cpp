#include "mmfnd/fusion/model.hpp"

#include "mmfnd/fusion/heads.hpp"
#include "mmfnd/fusion/mmbt.hpp"

namespace mmfnd::fusion {

std::unique_ptr<FusionModel> make_model(const FusionModelConfig& config, std::uint64_t seed) {
  if (config.architecture == Architecture::CLIP_MMBT)
    return std::make_unique<MmbtModel>(config, seed);
  return std::make_unique<EmbeddingHeadModel>(config, seed);
}

}  // namespace mmfnd::fusion
