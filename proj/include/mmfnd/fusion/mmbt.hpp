#pragma once

#include <vector>

#include "mmfnd/fusion/model.hpp"
#include "mmfnd/fusion/tokenizer.hpp"

namespace mmfnd::fusion {

// Layout of one fused sequence: N projected image tokens, a separator, the
// text tokens, a trailing separator. Segment ids split image prefix from the
// rest; classification reads the pooled first position.
struct MmbtSequence {
  int image_tokens = 0;
  std::vector<int> token_ids;    // ids for the non-image positions (SEP text... SEP)
  std::vector<int> segment_ids;  // one per position, image prefix first
  std::size_t length() const { return static_cast<std::size_t>(image_tokens) + token_ids.size(); }
};

// Text is truncated to fit max_seq; the image prefix is never truncated.
// Throws SequenceTooLongError when even prefix + separators exceed max_seq
// and DimMismatchError when image_vec does not match the configured dim.
MmbtSequence build_mmbt_sequence(const Eigen::VectorXd& image_vec,
                                 const std::vector<int>& text_tokens,
                                 const FusionModelConfig& config);

// Multimodal bitransformer head: image embedding projected into the token
// space as prefix tokens, a small transformer encoder over the fused
// sequence, one sigmoid unit on the pooled first position. Samples are
// processed one by one (lengths vary), so no padding or masking exists.
class MmbtModel : public FusionModel {
 public:
  MmbtModel(FusionModelConfig config, std::uint64_t seed);

  std::vector<Tensor*> parameters() override;
  Eigen::VectorXd score_batch(const EncodedDataset& ds,
                              const std::vector<std::size_t>& idx) override;
  double compute_loss(const EncodedDataset& ds, const std::vector<std::size_t>& idx,
                      const Eigen::VectorXd& weights, bool with_grad) override;

  // Single-sample logit; exposed for gradient checks.
  double forward_logit(const Eigen::VectorXd& image_vec, const std::string& text);
  // dL/dlogit for the sample most recently passed through forward_logit.
  void backward(double dlogit);

  const HashTokenizer& tokenizer() const { return tokenizer_; }

 private:
  struct LayerParams {
    Tensor Wq, bq, Wk, bk, Wv, bv, Wo, bo;
    Tensor ln1_g, ln1_b;
    Tensor W1, b1, W2, b2;
    Tensor ln2_g, ln2_b;
  };
  struct LayerCache {
    Eigen::MatrixXd x;           // layer input
    std::vector<Eigen::MatrixXd> probs;  // per-head attention rows
    Eigen::MatrixXd q, k, v, o;  // projections and concatenated head output
    Eigen::MatrixXd r1, x1;      // first residual sum and its layernorm
    Eigen::MatrixXd f1, g;       // feed-forward pre-activation and activation
    Eigen::MatrixXd r2, x2;      // second residual sum and its layernorm
  };

  Eigen::MatrixXd embed(const MmbtSequence& seq, const Eigen::VectorXd& image_vec);
  Eigen::MatrixXd layer_forward(std::size_t l, const Eigen::MatrixXd& x);
  Eigen::MatrixXd layer_backward(std::size_t l, const Eigen::MatrixXd& dout);

  HashTokenizer tokenizer_;
  Tensor tok_emb_, pos_emb_, seg_emb_;  // d_model x {table, max_seq, 2}
  Dense img_proj_;                      // image_dim -> N * d_model
  std::vector<LayerParams> layers_;
  Dense out_;  // d_model -> 1

  // caches for the most recent forward_logit
  MmbtSequence last_seq_;
  std::vector<LayerCache> caches_;
  Eigen::MatrixXd last_x0_;
};

}  // namespace mmfnd::fusion
