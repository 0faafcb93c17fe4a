#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mmfnd/core/types.hpp"
#include "mmfnd/fusion/model.hpp"

namespace mmfnd::eval {

enum class Averaging { MACRO, MICRO, PER_CLASS };

std::string to_string(Averaging mode);
Averaging averaging_from_string(const std::string& s);

struct LabeledId {
  std::string post_id;
  Label label = Label::FAKE;

  bool operator==(const LabeledId&) const = default;
};

std::vector<LabeledId> labeled_ids(const DatasetSplit& split);

// FAKE is the positive class throughout.
struct ConfusionMatrix {
  std::size_t tp = 0;  // fake predicted fake
  std::size_t fp = 0;  // real predicted fake
  std::size_t fn = 0;  // fake predicted real
  std::size_t tn = 0;  // real predicted real

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool zero_division = false;  // some term had an empty denominator
};

struct EvalReport {
  std::string set_name;
  std::size_t n_fake = 0;  // ground truth composition
  std::size_t n_real = 0;
  std::size_t predicted_fake = 0;  // N_F
  std::size_t predicted_real = 0;  // N_R
  ConfusionMatrix confusion;
  Averaging averaging = Averaging::MACRO;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ClassMetrics fake_class;
  ClassMetrics real_class;
  bool zero_division = false;
};

// Predictions and truth aligned pairwise by post id. MACRO averages the
// per-class metrics, MICRO pools the counts, PER_CLASS reports the positive
// (FAKE) class. Throws LengthMismatchError and UnknownIdError on id drift.
EvalReport compute_metrics(const std::vector<fusion::Prediction>& predictions,
                           const std::vector<LabeledId>& truth,
                           Averaging averaging = Averaging::MACRO,
                           const std::string& set_name = "");

}  // namespace mmfnd::eval
