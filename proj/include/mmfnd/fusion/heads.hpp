#pragma once

#include <vector>

#include "mmfnd/fusion/model.hpp"

namespace mmfnd::fusion {

// The two embedding-level heads (BERT_RESNET, MLP_CLIP): a projection stack
// per modality, concatenation (text block first, then image), an optional
// fused hidden layer, and a sigmoid output read through per-unit BCE.
class EmbeddingHeadModel : public FusionModel {
 public:
  EmbeddingHeadModel(FusionModelConfig config, std::uint64_t seed);

  std::vector<Tensor*> parameters() override;
  Eigen::VectorXd score_batch(const EncodedDataset& ds,
                              const std::vector<std::size_t>& idx) override;
  double compute_loss(const EncodedDataset& ds, const std::vector<std::size_t>& idx,
                      const Eigen::VectorXd& weights, bool with_grad) override;

  // Raw logits for a (text, image) column batch; exposed for gradient checks.
  Eigen::MatrixXd forward_logits(const Eigen::MatrixXd& text, const Eigen::MatrixXd& image);
  // dL/dlogits in, parameter grads accumulated.
  void backward(const Eigen::MatrixXd& dlogits);

 private:
  Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) const;

  std::vector<Dense> text_branch_;
  std::vector<Dense> image_branch_;
  std::vector<Dense> fused_;  // optional hidden layer, then the output layer
  Eigen::Index text_out_ = 0;
};

}  // namespace mmfnd::fusion
