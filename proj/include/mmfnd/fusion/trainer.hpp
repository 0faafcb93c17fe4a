#pragma once

#include <string>
#include <vector>

#include "mmfnd/fusion/checkpoint.hpp"
#include "mmfnd/fusion/dataset.hpp"
#include "mmfnd/fusion/model.hpp"

namespace mmfnd::fusion {

struct EpochRecord {
  int epoch = 0;  // 0 is the pre-training baseline
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_time_sec = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  Checkpoint checkpoint;  // parameters of the epoch with minimum validation loss
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

// Mini-batch training with best-validation-loss selection. The model must
// already be initialized (make_model pins init to the seed); the shuffle
// stream derives from tcfg.seed, so a rerun reproduces the checkpoint
// bitwise. Validation loss is always unweighted, even with class weights on.
// Throws EmptySplitError, MisalignedIdsError on overlapping train/val ids,
// NonFiniteLossError with an epoch/batch diagnostic.
TrainResult train(FusionModel& model, const EncodedDataset& train_ds,
                  const EncodedDataset& val_ds, const TrainingConfig& tcfg);

// One Prediction per dataset row, order-preserving; empty in, empty out.
std::vector<Prediction> predict_split(FusionModel& model, const EncodedDataset& ds);
// Rebuilds the model first; refuses embeddings from other encoders
// (CacheKeyMismatchError) before any dimension check can mislead.
std::vector<Prediction> predict_with_checkpoint(const Checkpoint& ckpt, const EncodedDataset& ds);

// Line-delimited epoch records.
void write_training_log(const std::string& path, const std::vector<EpochRecord>& log);
std::vector<EpochRecord> read_training_log(const std::string& path);

}  // namespace mmfnd::fusion
