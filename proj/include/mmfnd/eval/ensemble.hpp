#pragma once

#include <string>
#include <vector>

#include "mmfnd/fusion/model.hpp"

namespace mmfnd::eval {

enum class VoteRule { MAJORITY };

struct EnsembleSpec {
  std::vector<std::string> member_checkpoints;  // odd length enforced at vote time
  VoteRule rule = VoteRule::MAJORITY;

  void save(const std::string& path) const;
  static EnsembleSpec load(const std::string& path);
  bool operator==(const EnsembleSpec&) const = default;
};

// Per post: label = mode of the member labels, score = mean of the member
// scores (informational; the label comes from the vote, and when every
// member agrees on a score the mean is that exact score). Throws
// EvenMemberCountError unless the member count is odd, MisalignedIdsError
// when member lists disagree on length or post ids.
std::vector<fusion::Prediction> majority_vote(
    const std::vector<std::vector<fusion::Prediction>>& members);

}  // namespace mmfnd::eval
