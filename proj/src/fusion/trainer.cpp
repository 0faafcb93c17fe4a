#include "mmfnd/fusion/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"
#include "mmfnd/core/rng.hpp"

namespace mmfnd::fusion {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Per-sample multipliers; balanced inverse-frequency when the flag is set.
Eigen::VectorXd sample_weights(const EncodedDataset& ds, bool class_weights) {
  auto n = static_cast<Eigen::Index>(ds.size());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!class_weights) return w;
  double fake = 0, real = 0;
  for (Label l : ds.labels) (l == Label::REAL ? real : fake) += 1.0;
  double total = fake + real;
  double w_fake = fake > 0 ? total / (2.0 * fake) : 1.0;
  double w_real = real > 0 ? total / (2.0 * real) : 1.0;
  for (Eigen::Index j = 0; j < n; ++j)
    w(j) = ds.labels[static_cast<std::size_t>(j)] == Label::REAL ? w_real : w_fake;
  return w;
}

// Grad-free mean loss over the whole dataset, batched to bound memory.
double eval_loss(FusionModel& model, const EncodedDataset& ds, int batch_size) {
  Eigen::VectorXd ones;
  double total = 0.0;
  std::size_t done = 0;
  while (done < ds.size()) {
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                             ds.size() - done);
    std::vector<std::size_t> idx(take);
    std::iota(idx.begin(), idx.end(), done);
    ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(take));
    total += model.compute_loss(ds, idx, ones, false) * static_cast<double>(take);
    done += take;
  }
  return total / static_cast<double>(ds.size());
}

std::vector<Eigen::MatrixXd> take_snapshot(FusionModel& model) {
  std::vector<Eigen::MatrixXd> snap;
  for (const Tensor* t : model.parameters()) snap.push_back(t->value);
  return snap;
}

void restore_snapshot(FusionModel& model, const std::vector<Eigen::MatrixXd>& snap) {
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

}  // namespace

TrainResult train(FusionModel& model, const EncodedDataset& train_ds,
                  const EncodedDataset& val_ds, const TrainingConfig& tcfg) {
  if (train_ds.empty()) throw EmptySplitError("train split is empty");
  if (val_ds.empty()) throw EmptySplitError("validation split is empty");
  if (tcfg.epochs < 1 || tcfg.batch_size < 1)
    throw ConfigInvalidError("epochs and batch size must be positive");

  std::unordered_set<std::string> train_ids(train_ds.ids.begin(), train_ds.ids.end());
  for (const auto& id : val_ds.ids)
    if (train_ids.contains(id))
      throw MisalignedIdsError("post " + id + " appears in both train and validation");

  bool one_class = true;
  for (const Label l : train_ds.labels)
    if (l != train_ds.labels.front()) {
      one_class = false;
      break;
    }
  if (one_class)
    std::cerr << "[train] train split contains a single class; training anyway\n";

  Eigen::VectorXd weights = sample_weights(train_ds, tcfg.class_weights);
  Rng shuffle_rng(derive_seed(tcfg.seed, "shuffle"));
  Adam adam(tcfg.learning_rate);

  TrainResult result;
  auto t0 = Clock::now();
  double train0 = eval_loss(model, train_ds, tcfg.batch_size);
  double val0 = eval_loss(model, val_ds, tcfg.batch_size);
  if (!std::isfinite(train0) || !std::isfinite(val0))
    throw NonFiniteLossError("non-finite loss before training (epoch 0)");
  result.log.push_back({0, train0, val0, seconds_since(t0)});
  result.best_epoch = 0;
  result.best_val_loss = val0;
  std::vector<Eigen::MatrixXd> best_params = take_snapshot(model);

  std::vector<std::size_t> order(train_ds.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    auto epoch_start = Clock::now();
    shuffle_rng.shuffle(order);
    double total = 0.0;
    std::size_t done = 0;
    int batch_no = 0;
    while (done < order.size()) {
      std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(tcfg.batch_size),
                                               order.size() - done);
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(done),
                                   order.begin() + static_cast<std::ptrdiff_t>(done + take));
      Eigen::VectorXd w(static_cast<Eigen::Index>(take));
      for (std::size_t j = 0; j < take; ++j)
        w(static_cast<Eigen::Index>(j)) = weights(static_cast<Eigen::Index>(idx[j]));

      model.zero_grad();
      double loss = model.compute_loss(train_ds, idx, w, true);
      if (!std::isfinite(loss))
        throw NonFiniteLossError("non-finite train loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch_no));
      adam.step(model.parameters());
      total += loss * static_cast<double>(take);
      done += take;
      ++batch_no;
    }
    double train_loss = total / static_cast<double>(order.size());
    double val_loss = eval_loss(model, val_ds, tcfg.batch_size);
    if (!std::isfinite(val_loss))
      throw NonFiniteLossError("non-finite validation loss at epoch " + std::to_string(epoch));
    result.log.push_back({epoch, train_loss, val_loss, seconds_since(epoch_start)});
    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      best_params = take_snapshot(model);
    }
  }

  restore_snapshot(model, best_params);
  result.checkpoint = Checkpoint::capture(model, train_ds.text_encoder, train_ds.image_encoder,
                                          tcfg.seed, result.best_epoch, result.best_val_loss);
  return result;
}

std::vector<Prediction> predict_split(FusionModel& model, const EncodedDataset& ds) {
  std::vector<Prediction> out;
  constexpr std::size_t kChunk = 256;
  std::size_t done = 0;
  while (done < ds.size()) {
    std::size_t take = std::min(kChunk, ds.size() - done);
    std::vector<std::size_t> idx(take);
    std::iota(idx.begin(), idx.end(), done);
    Eigen::VectorXd scores = model.score_batch(ds, idx);
    for (std::size_t j = 0; j < take; ++j) {
      double s = scores(static_cast<Eigen::Index>(j));
      out.push_back({ds.ids[done + j], s, label_for_score(s)});
    }
    done += take;
  }
  return out;
}

std::vector<Prediction> predict_with_checkpoint(const Checkpoint& ckpt,
                                                const EncodedDataset& ds) {
  if (!ds.empty() &&
      (ds.text_encoder != ckpt.text_encoder || ds.image_encoder != ckpt.image_encoder))
    throw CacheKeyMismatchError("checkpoint was trained on " + ckpt.text_encoder + "/" +
                                ckpt.image_encoder + ", embeddings come from " +
                                ds.text_encoder + "/" + ds.image_encoder);
  auto model = model_from_checkpoint(ckpt);
  return predict_split(*model, ds);
}

void write_training_log(const std::string& path, const std::vector<EpochRecord>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw EncodingError("cannot open training log for writing: " + path);
  for (const EpochRecord& rec : log) {
    nlohmann::json j{{"epoch", rec.epoch},
                     {"train_loss", rec.train_loss},
                     {"val_loss", rec.val_loss},
                     {"wall_time_sec", rec.wall_time_sec}};
    out << j.dump() << "\n";
  }
}

std::vector<EpochRecord> read_training_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingCacheError("no training log at " + path);
  std::vector<EpochRecord> log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      log.push_back({j.at("epoch").get<int>(), j.at("train_loss").get<double>(),
                     j.at("val_loss").get<double>(), j.at("wall_time_sec").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw EncodingError("bad training log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

}  // namespace mmfnd::fusion
