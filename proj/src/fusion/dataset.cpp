#include "mmfnd/fusion/dataset.hpp"

#include <iostream>
#include <unordered_map>

#include "mmfnd/core/errors.hpp"

namespace mmfnd::fusion {

Eigen::MatrixXd EncodedDataset::one_hot_targets() const {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j)
    t(labels[j] == Label::REAL ? 1 : 0, static_cast<Eigen::Index>(j)) = 1.0;
  return t;
}

Eigen::MatrixXd EncodedDataset::scalar_targets() const {
  Eigen::MatrixXd t(1, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j)
    t(0, static_cast<Eigen::Index>(j)) = labels[j] == Label::REAL ? 1.0 : 0.0;
  return t;
}

EncodedDataset EncodedDataset::from_split(const DatasetSplit& split,
                                          const std::vector<encode::EmbeddingPair>& pairs) {
  std::unordered_map<std::string, const encode::EmbeddingPair*> by_id;
  for (const auto& pair : pairs) by_id.emplace(pair.post_id, &pair);

  std::unordered_map<std::string, bool> post_ids;
  for (const auto& post : split.posts) post_ids.emplace(post.id, true);
  for (const auto& pair : pairs)
    if (!post_ids.contains(pair.post_id))
      throw MisalignedIdsError("embedding for unknown post id: " + pair.post_id);

  std::vector<const Post*> kept;
  for (const auto& post : split.posts) {
    if (by_id.contains(post.id)) {
      kept.push_back(&post);
    } else {
      std::cerr << "[dataset] no embedding for " << post.id << ", skipping\n";
    }
  }
  if (kept.empty()) throw EmptySplitError("no posts with embeddings in split " + split.name);

  const auto& first = *by_id.at(kept.front()->id);
  auto text_dim = static_cast<Eigen::Index>(first.text_vec.size());
  auto image_dim = static_cast<Eigen::Index>(first.image_vec.size());

  EncodedDataset ds;
  ds.text_encoder = first.text_encoder;
  ds.image_encoder = first.image_encoder;
  ds.text.resize(text_dim, static_cast<Eigen::Index>(kept.size()));
  ds.image.resize(image_dim, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const Post& post = *kept[j];
    const auto& pair = *by_id.at(post.id);
    if (static_cast<Eigen::Index>(pair.text_vec.size()) != text_dim ||
        static_cast<Eigen::Index>(pair.image_vec.size()) != image_dim)
      throw DimMismatchError("embedding dims vary within split at " + post.id);
    ds.ids.push_back(post.id);
    ds.texts.push_back(post.text);
    ds.labels.push_back(post.label);
    for (Eigen::Index r = 0; r < text_dim; ++r)
      ds.text(r, static_cast<Eigen::Index>(j)) = static_cast<double>(pair.text_vec[r]);
    for (Eigen::Index r = 0; r < image_dim; ++r)
      ds.image(r, static_cast<Eigen::Index>(j)) = static_cast<double>(pair.image_vec[r]);
  }
  return ds;
}

}  // namespace mmfnd::fusion
