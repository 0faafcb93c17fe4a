#include "mmfnd/fusion/heads.hpp"

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"

namespace mmfnd::fusion {

EmbeddingHeadModel::EmbeddingHeadModel(FusionModelConfig config, std::uint64_t seed)
    : FusionModel(std::move(config)) {
  const auto& cfg = this->config();
  if (cfg.text_dim <= 0 || cfg.image_dim <= 0)
    throw ConfigInvalidError("embedding head requires positive input dims");
  Rng rng(derive_seed(seed, "init:" + to_string(cfg.architecture)));

  Eigen::Index in = cfg.text_dim;
  for (std::size_t i = 0; i < cfg.proj_dims.size(); ++i) {
    text_branch_.emplace_back("text." + std::to_string(i), in, cfg.proj_dims[i],
                              cfg.proj_activation, rng);
    in = cfg.proj_dims[i];
  }
  text_out_ = in;
  in = cfg.image_dim;
  for (std::size_t i = 0; i < cfg.proj_dims.size(); ++i) {
    image_branch_.emplace_back("image." + std::to_string(i), in, cfg.proj_dims[i],
                               cfg.proj_activation, rng);
    in = cfg.proj_dims[i];
  }

  Eigen::Index fused_in = text_out_ + in;
  if (cfg.fusion_dim > 0) {
    fused_.emplace_back("fused", fused_in, cfg.fusion_dim, cfg.fusion_activation, rng);
    fused_in = cfg.fusion_dim;
  }
  Eigen::Index units = cfg.output_mode == OutputMode::TWO_UNIT_SIGMOID ? 2 : 1;
  fused_.emplace_back("out", fused_in, units, Act::NONE, rng);
}

std::vector<Tensor*> EmbeddingHeadModel::parameters() {
  std::vector<Tensor*> out;
  for (auto* branch : {&text_branch_, &image_branch_, &fused_})
    for (Dense& layer : *branch)
      for (Tensor* t : layer.parameters()) out.push_back(t);
  return out;
}

Eigen::MatrixXd EmbeddingHeadModel::forward_logits(const Eigen::MatrixXd& text,
                                                   const Eigen::MatrixXd& image) {
  if (text.rows() != config().text_dim || image.rows() != config().image_dim)
    throw DimMismatchError("input dims " + std::to_string(text.rows()) + "x" +
                           std::to_string(image.rows()) + " do not match head config");
  Eigen::MatrixXd t = text;
  for (Dense& layer : text_branch_) t = layer.forward(t);
  Eigen::MatrixXd i = image;
  for (Dense& layer : image_branch_) i = layer.forward(i);

  Eigen::MatrixXd fused(t.rows() + i.rows(), t.cols());
  fused.topRows(t.rows()) = t;
  fused.bottomRows(i.rows()) = i;
  for (Dense& layer : fused_) fused = layer.forward(fused);
  return fused;
}

void EmbeddingHeadModel::backward(const Eigen::MatrixXd& dlogits) {
  Eigen::MatrixXd d = dlogits;
  for (auto it = fused_.rbegin(); it != fused_.rend(); ++it) d = it->backward(d);

  Eigen::MatrixXd dt = d.topRows(text_out_);
  Eigen::MatrixXd di = d.bottomRows(d.rows() - text_out_);
  for (auto it = text_branch_.rbegin(); it != text_branch_.rend(); ++it) dt = it->backward(dt);
  for (auto it = image_branch_.rbegin(); it != image_branch_.rend(); ++it) di = it->backward(di);
}

Eigen::MatrixXd EmbeddingHeadModel::gather(const Eigen::MatrixXd& m,
                                           const std::vector<std::size_t>& idx) const {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(idx[j]));
  return out;
}

Eigen::VectorXd EmbeddingHeadModel::score_batch(const EncodedDataset& ds,
                                                const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd logits = forward_logits(gather(ds.text, idx), gather(ds.image, idx));
  Eigen::MatrixXd s = sigmoid(logits);
  // Two-unit heads: the scalar score is the REAL unit's sigmoid output.
  Eigen::Index real_row = s.rows() == 2 ? 1 : 0;
  return s.row(real_row).transpose();
}

double EmbeddingHeadModel::compute_loss(const EncodedDataset& ds,
                                        const std::vector<std::size_t>& idx,
                                        const Eigen::VectorXd& weights, bool with_grad) {
  Eigen::MatrixXd logits = forward_logits(gather(ds.text, idx), gather(ds.image, idx));
  Eigen::MatrixXd all_targets = config().output_mode == OutputMode::TWO_UNIT_SIGMOID
                                    ? ds.one_hot_targets()
                                    : ds.scalar_targets();
  Eigen::MatrixXd targets = gather(all_targets, idx);
  Eigen::MatrixXd dlogits;
  double loss = bce_with_logits(logits, targets, weights, with_grad ? &dlogits : nullptr);
  if (with_grad) backward(dlogits);
  return loss;
}

}  // namespace mmfnd::fusion
