#include "mmfnd/eval/metrics.hpp"

#include "mmfnd/core/errors.hpp"

namespace mmfnd::eval {

std::string to_string(Averaging mode) {
  switch (mode) {
    case Averaging::MACRO:
      return "macro";
    case Averaging::MICRO:
      return "micro";
    case Averaging::PER_CLASS:
      return "per_class";
  }
  throw ConfigInvalidError("unknown averaging value");
}

Averaging averaging_from_string(const std::string& s) {
  if (s == "macro") return Averaging::MACRO;
  if (s == "micro") return Averaging::MICRO;
  if (s == "per_class") return Averaging::PER_CLASS;
  throw ConfigInvalidError("unknown averaging mode: " + s);
}

std::vector<LabeledId> labeled_ids(const DatasetSplit& split) {
  std::vector<LabeledId> out;
  out.reserve(split.posts.size());
  for (const Post& post : split.posts) out.push_back({post.id, post.label});
  return out;
}

namespace {

// Ratio with the zero-division convention: empty denominator reports 0.0
// and raises the flag.
double ratio(std::size_t num, std::size_t den, bool& flag) {
  if (den == 0) {
    flag = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r, bool& flag) {
  if (p + r == 0.0) {
    flag = true;
    return 0.0;
  }
  return 2.0 * p * r / (p + r);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp, m.zero_division);
  m.recall = ratio(tp, tp + fn, m.zero_division);
  m.f1 = harmonic(m.precision, m.recall, m.zero_division);
  return m;
}

}  // namespace

EvalReport compute_metrics(const std::vector<fusion::Prediction>& predictions,
                           const std::vector<LabeledId>& truth, Averaging averaging,
                           const std::string& set_name) {
  if (predictions.size() != truth.size())
    throw LengthMismatchError(std::to_string(predictions.size()) + " predictions against " +
                              std::to_string(truth.size()) + " labels");
  if (predictions.empty()) throw LengthMismatchError("cannot score an empty prediction list");

  EvalReport rep;
  rep.set_name = set_name;
  rep.averaging = averaging;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].post_id != truth[i].post_id)
      throw UnknownIdError("prediction " + predictions[i].post_id +
                           " does not line up with label " + truth[i].post_id);
    bool truth_fake = truth[i].label == Label::FAKE;
    bool pred_fake = predictions[i].label == Label::FAKE;
    (truth_fake ? rep.n_fake : rep.n_real) += 1;
    (pred_fake ? rep.predicted_fake : rep.predicted_real) += 1;
    if (truth_fake && pred_fake) rep.confusion.tp += 1;
    if (!truth_fake && pred_fake) rep.confusion.fp += 1;
    if (truth_fake && !pred_fake) rep.confusion.fn += 1;
    if (!truth_fake && !pred_fake) rep.confusion.tn += 1;
  }

  const ConfusionMatrix& cm = rep.confusion;
  rep.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  rep.fake_class = class_metrics(cm.tp, cm.fp, cm.fn);
  // the REAL class sees the matrix mirrored
  rep.real_class = class_metrics(cm.tn, cm.fn, cm.fp);
  rep.zero_division = rep.fake_class.zero_division || rep.real_class.zero_division;

  switch (averaging) {
    case Averaging::MACRO:
      rep.precision = (rep.fake_class.precision + rep.real_class.precision) / 2.0;
      rep.recall = (rep.fake_class.recall + rep.real_class.recall) / 2.0;
      rep.f1 = (rep.fake_class.f1 + rep.real_class.f1) / 2.0;
      break;
    case Averaging::MICRO: {
      // pooled counts: every prediction is one true-or-false call per class
      std::size_t tp = cm.tp + cm.tn;
      std::size_t fp = cm.fp + cm.fn;
      std::size_t fn = cm.fn + cm.fp;
      bool flag = false;
      rep.precision = ratio(tp, tp + fp, flag);
      rep.recall = ratio(tp, tp + fn, flag);
      rep.f1 = harmonic(rep.precision, rep.recall, flag);
      rep.zero_division = rep.zero_division || flag;
      break;
    }
    case Averaging::PER_CLASS:
      rep.precision = rep.fake_class.precision;
      rep.recall = rep.fake_class.recall;
      rep.f1 = rep.fake_class.f1;
      break;
  }
  return rep;
}

}  // namespace mmfnd::eval
