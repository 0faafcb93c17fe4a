#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmfnd/core/types.hpp"
#include "mmfnd/encode/encoder.hpp"

namespace mmfnd::fusion {

// Column-aligned training view over a split and its cached embeddings.
// Column j of text/image belongs to ids[j]; texts carries the raw post text
// for the token-level MMBT path.
struct EncodedDataset {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
  std::vector<Label> labels;
  Eigen::MatrixXd text;   // text_dim x n
  Eigen::MatrixXd image;  // image_dim x n
  std::string text_encoder;
  std::string image_encoder;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }

  // Targets as a one-hot (2 x n) matrix, unit 0 = FAKE, unit 1 = REAL.
  Eigen::MatrixXd one_hot_targets() const;
  // Targets as a (1 x n) row of {0,1}, REAL = 1.
  Eigen::MatrixXd scalar_targets() const;

  // Joins split posts with embedding pairs by post id. Posts without a pair
  // are skipped with a log line (the encoder may have dropped them); a pair
  // without a post is a MisalignedIdsError. Throws EmptySplitError when
  // nothing survives the join.
  static EncodedDataset from_split(const DatasetSplit& split,
                                   const std::vector<encode::EmbeddingPair>& pairs);
};

}  // namespace mmfnd::fusion
