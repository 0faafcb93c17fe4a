#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mmfnd/core/types.hpp"
#include "mmfnd/fusion/config.hpp"
#include "mmfnd/fusion/dataset.hpp"

namespace mmfnd::fusion {

struct Prediction {
  std::string post_id;
  double score = 0.0;  // probability of REAL
  Label label = Label::FAKE;

  bool operator==(const Prediction&) const = default;
};

inline Label label_for_score(double score) { return score >= 0.5 ? Label::REAL : Label::FAKE; }

// A trainable classification head. Scoring is pure; training accumulates
// gradients into the parameter tensors for the optimizer to consume.
class FusionModel {
 public:
  explicit FusionModel(FusionModelConfig config) : config_(std::move(config)) {}
  virtual ~FusionModel() = default;

  const FusionModelConfig& config() const { return config_; }
  virtual std::vector<Tensor*> parameters() = 0;

  // P(REAL) for each selected column of the dataset.
  virtual Eigen::VectorXd score_batch(const EncodedDataset& ds,
                                      const std::vector<std::size_t>& idx) = 0;
  // Mean loss over the batch; with_grad accumulates parameter gradients.
  // weights holds one multiplier per batch entry (class weighting).
  virtual double compute_loss(const EncodedDataset& ds, const std::vector<std::size_t>& idx,
                              const Eigen::VectorXd& weights, bool with_grad) = 0;

  void zero_grad() {
    for (Tensor* t : parameters()) t->zero_grad();
  }

 private:
  FusionModelConfig config_;
};

// Builds a freshly initialized model; parameter init is pinned by seed.
std::unique_ptr<FusionModel> make_model(const FusionModelConfig& config, std::uint64_t seed);

}  // namespace mmfnd::fusion
