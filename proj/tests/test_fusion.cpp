#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"
#include "mmfnd/core/rng.hpp"
#include "mmfnd/encode/encoder.hpp"
#include "mmfnd/fusion/checkpoint.hpp"
#include "mmfnd/fusion/heads.hpp"
#include "mmfnd/fusion/mmbt.hpp"
#include "mmfnd/fusion/tokenizer.hpp"
#include "mmfnd/fusion/trainer.hpp"

using namespace mmfnd;
using namespace mmfnd::fusion;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("mmfnd_fusion_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::uint8_t> ppm_bytes(const std::string& tag) {
  std::string s = "P6\n# tag:" + tag + "\n2 2\n255\n" + std::string(12, '\x42');
  return {s.begin(), s.end()};
}

// Planted-pair corpus: REAL posts carry the same key in text and image,
// FAKE posts carry mismatched keys, so cross-modal agreement predicts the
// label. Texts get a per-post suffix so embeddings are all distinct.
EncodedDataset planted_dataset(int n, int dim, std::uint64_t seed, const std::string& name) {
  auto text_enc = encode::make_encoder(encode::EncoderSpec::mock(encode::Modality::TEXT, dim),
                                       {.seed = seed});
  auto image_enc = encode::make_encoder(encode::EncoderSpec::mock(encode::Modality::IMAGE, dim),
                                        {.seed = seed});
  DatasetSplit split;
  split.name = name;
  std::vector<encode::EmbeddingPair> pairs;
  for (int i = 0; i < n; ++i) {
    std::string key = "evt-k" + std::to_string(i % 4);
    std::string other = "evt-k" + std::to_string((i + 1) % 4);
    bool real = i % 2 == 0;
    Post p;
    p.id = name + "/" + std::to_string(i);
    p.text = "dispatch " + std::to_string(i) + " covering " + key + " tonight";
    p.image_ref = "img-" + std::to_string(i);
    p.label = real ? Label::REAL : Label::FAKE;
    split.posts.push_back(p);
    (real ? split.real_count : split.fake_count) += 1;
    pairs.push_back({p.id, text_enc->encode_text(p.id, p.text),
                     image_enc->encode_image(p.id, ppm_bytes(real ? key : other)),
                     text_enc->spec().name, image_enc->spec().name});
  }
  return EncodedDataset::from_split(split, pairs);
}

// Random-content dataset for structural tests; labels alternate.
EncodedDataset random_dataset(int n, int text_dim, int image_dim, std::uint64_t seed) {
  Rng rng(seed);
  EncodedDataset ds;
  ds.text_encoder = "mock-text-" + std::to_string(text_dim);
  ds.image_encoder = "mock-image-" + std::to_string(image_dim);
  ds.text.resize(text_dim, n);
  ds.image.resize(image_dim, n);
  for (int j = 0; j < n; ++j) {
    ds.ids.push_back("r/" + std::to_string(j));
    ds.texts.push_back("word" + std::to_string(j) + " filler text here");
    ds.labels.push_back(j % 2 == 0 ? Label::REAL : Label::FAKE);
    for (int r = 0; r < text_dim; ++r) ds.text(r, j) = rng.normal();
    for (int r = 0; r < image_dim; ++r) ds.image(r, j) = rng.normal();
  }
  return ds;
}

// Central-difference gradient check over every parameter element.
double max_grad_rel_err(FusionModel& model, const EncodedDataset& ds,
                        const std::vector<std::size_t>& idx) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(idx.size()));
  model.zero_grad();
  model.compute_loss(ds, idx, w, true);
  std::vector<Eigen::MatrixXd> analytic;
  for (Tensor* t : model.parameters()) analytic.push_back(t->grad);

  const double h = 1e-5;
  double worst = 0.0;
  auto params = model.parameters();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Eigen::MatrixXd& v = params[pi]->value;
    for (Eigen::Index c = 0; c < v.cols(); ++c)
      for (Eigen::Index r = 0; r < v.rows(); ++r) {
        double orig = v(r, c);
        v(r, c) = orig + h;
        double lp = model.compute_loss(ds, idx, w, false);
        v(r, c) = orig - h;
        double lm = model.compute_loss(ds, idx, w, false);
        v(r, c) = orig;
        double numeric = (lp - lm) / (2.0 * h);
        double exact = analytic[pi](r, c);
        double mag = std::max(std::abs(numeric), std::abs(exact));
        if (mag < 1e-7) continue;  // below the finite-difference noise floor
        worst = std::max(worst, std::abs(numeric - exact) / mag);
      }
  }
  return worst;
}

Tensor* find_param(FusionModel& model, const std::string& name) {
  for (Tensor* t : model.parameters())
    if (t->name == name) return t;
  return nullptr;
}

FusionModelConfig tiny_head_config(Architecture arch) {
  FusionModelConfig cfg = FusionModelConfig::preset(arch, 5, 7);
  cfg.proj_dims = {6, 4};
  if (cfg.fusion_dim > 0) cfg.fusion_dim = 3;
  return cfg;
}

FusionModelConfig tiny_mmbt_config(int image_dim = 7) {
  FusionModelConfig cfg = FusionModelConfig::preset(Architecture::CLIP_MMBT, 5, image_dim);
  cfg.mmbt.vocab_size = 16;
  cfg.mmbt.max_seq = 12;
  cfg.mmbt.d_model = 8;
  cfg.mmbt.num_heads = 2;
  cfg.mmbt.num_layers = 2;
  cfg.mmbt.ff_dim = 10;
  return cfg;
}

}  // namespace

TEST_CASE("presets pin the published head shapes") {
  auto br = FusionModelConfig::preset(Architecture::BERT_RESNET, 768, 2048);
  CHECK(br.proj_dims == std::vector<int>{256, 256});
  CHECK(br.proj_activation == Act::GELU);
  CHECK(br.fusion_dim == 128);
  CHECK(br.fusion_activation == Act::RELU);
  CHECK(br.output_mode == OutputMode::TWO_UNIT_SIGMOID);

  auto mc = FusionModelConfig::preset(Architecture::MLP_CLIP, 512, 512);
  CHECK(mc.proj_dims == std::vector<int>{256, 128});
  CHECK(mc.proj_activation == Act::RELU);
  CHECK(mc.fusion_dim == 0);
  CHECK(mc.output_mode == OutputMode::TWO_UNIT_SIGMOID);

  auto mm = FusionModelConfig::preset(Architecture::CLIP_MMBT, 512, 512);
  CHECK(mm.output_mode == OutputMode::ONE_UNIT_SIGMOID);
  CHECK(mm.mmbt.image_prefix_tokens == 3);

  TrainingConfig tc = TrainingConfig::preset(Architecture::MLP_CLIP, 9);
  CHECK(tc.epochs == 30);
  CHECK(tc.batch_size == 32);
  CHECK(tc.learning_rate == doctest::Approx(1e-3));
  CHECK(tc.selection == Selection::BEST_VAL_LOSS);
  CHECK(TrainingConfig::preset(Architecture::CLIP_MMBT, 9).learning_rate ==
        doctest::Approx(2e-5));
}

TEST_CASE("model config round-trips through json") {
  for (Architecture arch :
       {Architecture::BERT_RESNET, Architecture::MLP_CLIP, Architecture::CLIP_MMBT}) {
    FusionModelConfig cfg = FusionModelConfig::preset(arch, 96, 160);
    CHECK(FusionModelConfig::from_json(cfg.to_json()) == cfg);
  }
  CHECK_THROWS_AS(FusionModelConfig::from_json(nlohmann::json{{"architecture", "mlp_clip"}}),
                  ConfigInvalidError);
}

TEST_CASE("score threshold maps to labels exactly at 0.5") {
  CHECK(label_for_score(0.5) == Label::REAL);
  CHECK(label_for_score(std::nextafter(0.5, 0.0)) == Label::FAKE);
  CHECK(label_for_score(0.0) == Label::FAKE);
  CHECK(label_for_score(1.0) == Label::REAL);
}

TEST_CASE("gradient check: bert_resnet head") {
  EncodedDataset ds = random_dataset(4, 5, 7, 11);
  EmbeddingHeadModel model(tiny_head_config(Architecture::BERT_RESNET), 21);
  CHECK(max_grad_rel_err(model, ds, {0, 1, 2, 3}) < 1e-4);
}

TEST_CASE("gradient check: mlp_clip head") {
  EncodedDataset ds = random_dataset(4, 5, 7, 12);
  EmbeddingHeadModel model(tiny_head_config(Architecture::MLP_CLIP), 22);
  CHECK(max_grad_rel_err(model, ds, {0, 1, 2, 3}) < 1e-4);
}

TEST_CASE("gradient check: mmbt head, including class weights") {
  EncodedDataset ds = random_dataset(4, 5, 7, 13);
  MmbtModel model(tiny_mmbt_config(), 23);
  CHECK(max_grad_rel_err(model, ds, {0, 1, 2, 3}) < 1e-4);

  // weighted loss must scale gradients consistently too
  Eigen::VectorXd w(4);
  w << 2.0, 0.5, 1.5, 1.0;
  model.zero_grad();
  double lw = model.compute_loss(ds, {0, 1, 2, 3}, w, true);
  CHECK(std::isfinite(lw));
}

TEST_CASE("batch forward equals per-item forward") {
  EncodedDataset ds = random_dataset(9, 6, 10, 31);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);

  FusionModelConfig head_cfg = FusionModelConfig::preset(Architecture::MLP_CLIP, 6, 10);
  head_cfg.proj_dims = {8, 5};
  EmbeddingHeadModel head(head_cfg, 41);
  Eigen::VectorXd batch = head.score_batch(ds, all);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    double single = head.score_batch(ds, {j})(0);
    CHECK(batch(static_cast<Eigen::Index>(j)) == doctest::Approx(single).epsilon(1e-5));
  }

  MmbtModel mmbt(tiny_mmbt_config(10), 42);
  Eigen::VectorXd mb = mmbt.score_batch(ds, all);
  for (std::size_t j = 0; j < ds.size(); ++j)
    CHECK(mb(static_cast<Eigen::Index>(j)) ==
          doctest::Approx(mmbt.score_batch(ds, {j})(0)).epsilon(1e-5));
}

TEST_CASE("zero inputs with a zeroed output layer score exactly 0.5") {
  EncodedDataset ds = random_dataset(3, 5, 7, 51);
  ds.text.setZero();
  ds.image.setZero();
  for (Architecture arch :
       {Architecture::BERT_RESNET, Architecture::MLP_CLIP, Architecture::CLIP_MMBT}) {
    auto model = arch == Architecture::CLIP_MMBT
                     ? std::unique_ptr<FusionModel>(new MmbtModel(tiny_mmbt_config(), 52))
                     : std::unique_ptr<FusionModel>(
                           new EmbeddingHeadModel(tiny_head_config(arch), 52));
    find_param(*model, "out.W")->value.setZero();
    find_param(*model, "out.b")->value.setZero();
    Eigen::VectorXd s = model->score_batch(ds, {0, 1, 2});
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(s(j) == 0.5);
  }
}

TEST_CASE("scores stay in [0,1] for wild inputs") {
  EncodedDataset ds = random_dataset(6, 5, 7, 61);
  ds.text *= 1e6;
  ds.image *= -1e6;
  EmbeddingHeadModel model(tiny_head_config(Architecture::BERT_RESNET), 62);
  Eigen::VectorXd s = model.score_batch(ds, {0, 1, 2, 3, 4, 5});
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    CHECK(s(j) >= 0.0);
    CHECK(s(j) <= 1.0);
  }
}

TEST_CASE("dim mismatch is refused") {
  EncodedDataset ds = random_dataset(2, 6, 7, 71);  // head expects text_dim 5
  EmbeddingHeadModel model(tiny_head_config(Architecture::MLP_CLIP), 72);
  CHECK_THROWS_AS(model.score_batch(ds, {0, 1}), DimMismatchError);

  MmbtModel mmbt(tiny_mmbt_config(9), 73);  // expects image_dim 9
  CHECK_THROWS_AS(mmbt.score_batch(ds, {0}), DimMismatchError);
}

TEST_CASE("hash tokenizer is deterministic and bounded") {
  HashTokenizer tok(32);
  auto a = tok.tokenize("Flood hits CityA! #breaking @wire", 100);
  auto b = tok.tokenize("flood HITS citya! #breaking @wire", 100);
  CHECK(a == b);  // case-insensitive
  CHECK(a.size() == 5);
  for (int id : a) {
    CHECK(id >= HashTokenizer::kNumSpecial);
    CHECK(id < tok.table_size());
  }
  CHECK(tok.tokenize("one two three four", 2).size() == 2);
  CHECK(tok.tokenize("", 10).empty());
  CHECK(tok.tokenize("...!!!", 10).empty());
  CHECK_THROWS_AS(HashTokenizer(0), ConfigInvalidError);
}

TEST_CASE("mmbt sequence layout and truncation") {
  FusionModelConfig cfg = tiny_mmbt_config();
  cfg.mmbt.max_seq = 64;
  Eigen::VectorXd img = Eigen::VectorXd::Zero(7);
  std::vector<int> ten(10, HashTokenizer::kNumSpecial + 1);

  MmbtSequence seq = build_mmbt_sequence(img, ten, cfg);
  // 10 text tokens + 3 image tokens = 13, plus the two separators
  CHECK(seq.length() == 15);
  CHECK(seq.image_tokens == 3);
  CHECK(seq.token_ids.front() == HashTokenizer::kSep);
  CHECK(seq.token_ids.back() == HashTokenizer::kSep);
  for (std::size_t p = 0; p < seq.length(); ++p)
    CHECK(seq.segment_ids[p] == (p < 3 ? 0 : 1));

  // text truncates to fit max_seq; the image prefix is never dropped
  cfg.mmbt.max_seq = 12;
  std::vector<int> many(30, HashTokenizer::kNumSpecial + 2);
  MmbtSequence cut = build_mmbt_sequence(img, many, cfg);
  CHECK(cut.length() == 12);
  CHECK(cut.image_tokens == 3);
  CHECK(cut.token_ids.size() == 9);  // SEP + 7 text + SEP

  cfg.mmbt.max_seq = 4;  // cannot even hold prefix + separators
  CHECK_THROWS_AS(build_mmbt_sequence(img, ten, cfg), SequenceTooLongError);

  cfg.mmbt.max_seq = 64;
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(6);
  CHECK_THROWS_AS(build_mmbt_sequence(bad, ten, cfg), DimMismatchError);
}

TEST_CASE("dataset join: skips unembedded posts, rejects orphans") {
  DatasetSplit split;
  split.name = "train";
  for (int i = 0; i < 3; ++i) {
    Post p;
    p.id = "t/" + std::to_string(i);
    p.text = "text " + std::to_string(i);
    p.label = i == 0 ? Label::REAL : Label::FAKE;
    split.posts.push_back(p);
  }
  auto pair = [](const std::string& id) {
    return encode::EmbeddingPair{id, {1.0f, 2.0f}, {3.0f}, "mock-text-2", "mock-image-1"};
  };
  // t/1 has no embedding: skipped with a log line
  EncodedDataset ds = EncodedDataset::from_split(split, {pair("t/0"), pair("t/2")});
  CHECK(ds.ids == std::vector<std::string>{"t/0", "t/2"});
  CHECK(ds.text.rows() == 2);
  CHECK(ds.image.rows() == 1);
  CHECK(ds.one_hot_targets().col(0)(1) == 1.0);  // REAL -> unit 1
  CHECK(ds.one_hot_targets().col(1)(0) == 1.0);  // FAKE -> unit 0
  CHECK(ds.scalar_targets()(0, 0) == 1.0);
  CHECK(ds.scalar_targets()(0, 1) == 0.0);

  CHECK_THROWS_AS(EncodedDataset::from_split(split, {pair("t/0"), pair("zzz")}),
                  MisalignedIdsError);
  CHECK_THROWS_AS(EncodedDataset::from_split(split, {}), EmptySplitError);
}

TEST_CASE("training learns the planted pairing and selects the best epoch") {
  EncodedDataset train_ds = planted_dataset(128, 16, 7001, "train");
  EncodedDataset val_ds = planted_dataset(32, 16, 7002, "val");

  FusionModelConfig cfg = FusionModelConfig::preset(Architecture::MLP_CLIP, 16, 16);
  auto model = make_model(cfg, 77);
  TrainingConfig tcfg = TrainingConfig::preset(Architecture::MLP_CLIP, 77);
  tcfg.epochs = 12;
  tcfg.batch_size = 16;
  TrainResult result = train(*model, train_ds, val_ds, tcfg);

  REQUIRE(result.log.size() == 13);  // epoch 0 baseline + 12 epochs
  CHECK(result.log.front().epoch == 0);
  // the selected epoch's validation loss is minimal over the whole log
  for (const EpochRecord& rec : result.log) CHECK(result.best_val_loss <= rec.val_loss);
  CHECK(result.checkpoint.epoch == result.best_epoch);
  CHECK(result.checkpoint.val_loss == result.best_val_loss);
  // the planted signal is learnable: the best epoch beats the baseline
  CHECK(result.best_val_loss < result.log.front().val_loss);

  // and accuracy on the held-out split clears 0.9
  std::vector<Prediction> preds = predict_split(*model, val_ds);
  REQUIRE(preds.size() == val_ds.size());
  int hits = 0;
  for (std::size_t j = 0; j < preds.size(); ++j)
    if (preds[j].label == val_ds.labels[j]) ++hits;
  CHECK(static_cast<double>(hits) / static_cast<double>(preds.size()) >= 0.9);
}

TEST_CASE("same seed reproduces the checkpoint hash, different seed does not") {
  EncodedDataset train_ds = planted_dataset(48, 8, 7101, "train");
  EncodedDataset val_ds = planted_dataset(16, 8, 7102, "val");
  FusionModelConfig cfg = FusionModelConfig::preset(Architecture::MLP_CLIP, 8, 8);
  cfg.proj_dims = {12, 6};

  auto run = [&](std::uint64_t seed) {
    auto model = make_model(cfg, seed);
    TrainingConfig tcfg = TrainingConfig::preset(Architecture::MLP_CLIP, seed);
    tcfg.epochs = 4;
    tcfg.batch_size = 8;
    return checkpoint_hash(train(*model, train_ds, val_ds, tcfg).checkpoint);
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("one-class train split warns but still trains") {
  EncodedDataset train_ds = planted_dataset(24, 8, 7201, "train");
  std::fill(train_ds.labels.begin(), train_ds.labels.end(), Label::REAL);
  EncodedDataset val_ds = planted_dataset(8, 8, 7202, "val");
  auto model = make_model(FusionModelConfig::preset(Architecture::MLP_CLIP, 8, 8), 9);
  TrainingConfig tcfg = TrainingConfig::preset(Architecture::MLP_CLIP, 9);
  tcfg.epochs = 2;
  tcfg.batch_size = 8;
  TrainResult result = train(*model, train_ds, val_ds, tcfg);
  CHECK(result.log.size() == 3);
}

TEST_CASE("degenerate training inputs are refused") {
  EncodedDataset ds = planted_dataset(8, 8, 7301, "train");
  EncodedDataset empty;
  auto model = make_model(FusionModelConfig::preset(Architecture::MLP_CLIP, 8, 8), 9);
  TrainingConfig tcfg = TrainingConfig::preset(Architecture::MLP_CLIP, 9);
  CHECK_THROWS_AS(train(*model, empty, ds, tcfg), EmptySplitError);
  CHECK_THROWS_AS(train(*model, ds, empty, tcfg), EmptySplitError);
  // overlapping ids violate the disjointness precondition
  CHECK_THROWS_AS(train(*model, ds, ds, tcfg), MisalignedIdsError);
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  EncodedDataset train_ds = planted_dataset(8, 8, 7401, "train");
  EncodedDataset val_ds = planted_dataset(4, 8, 7402, "val");
  train_ds.text(0, 0) = std::numeric_limits<double>::quiet_NaN();
  auto model = make_model(FusionModelConfig::preset(Architecture::MLP_CLIP, 8, 8), 9);
  TrainingConfig tcfg = TrainingConfig::preset(Architecture::MLP_CLIP, 9);
  tcfg.epochs = 2;
  CHECK_THROWS_AS(train(*model, train_ds, val_ds, tcfg), NonFiniteLossError);
}

TEST_CASE("class weights rebalance the loss") {
  // 3:1 imbalance; weighted loss differs from unweighted on the same model
  EncodedDataset ds = planted_dataset(16, 8, 7501, "train");
  for (std::size_t j = 0; j < ds.labels.size(); ++j)
    ds.labels[j] = j % 4 == 0 ? Label::FAKE : Label::REAL;
  EncodedDataset val_ds = planted_dataset(8, 8, 7502, "val");
  FusionModelConfig cfg = FusionModelConfig::preset(Architecture::MLP_CLIP, 8, 8);

  auto run = [&](bool weighted) {
    auto model = make_model(cfg, 9);
    TrainingConfig tcfg = TrainingConfig::preset(Architecture::MLP_CLIP, 9);
    tcfg.epochs = 1;
    tcfg.class_weights = weighted;
    return train(*model, ds, val_ds, tcfg).log.back().train_loss;
  };
  CHECK(run(true) != doctest::Approx(run(false)));
}

TEST_CASE("checkpoint round-trip is bitwise and reproduces predictions") {
  EncodedDataset train_ds = planted_dataset(32, 8, 7601, "train");
  EncodedDataset val_ds = planted_dataset(8, 8, 7602, "val");
  auto model = make_model(FusionModelConfig::preset(Architecture::BERT_RESNET, 8, 8), 31);
  TrainingConfig tcfg = TrainingConfig::preset(Architecture::BERT_RESNET, 31);
  tcfg.epochs = 3;
  tcfg.batch_size = 8;
  TrainResult result = train(*model, train_ds, val_ds, tcfg);

  fs::path dir = temp_dir("ckpt");
  std::string path = (dir / "model.ckpt").string();
  save_checkpoint(path, result.checkpoint);
  Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.model_config == result.checkpoint.model_config);
  CHECK(loaded.text_encoder == result.checkpoint.text_encoder);
  CHECK(loaded.seed == result.checkpoint.seed);
  CHECK(loaded.epoch == result.checkpoint.epoch);
  CHECK(loaded.val_loss == result.checkpoint.val_loss);
  REQUIRE(loaded.tensors.size() == result.checkpoint.tensors.size());
  for (std::size_t i = 0; i < loaded.tensors.size(); ++i) {
    CHECK(loaded.tensors[i].first == result.checkpoint.tensors[i].first);
    CHECK(loaded.tensors[i].second == result.checkpoint.tensors[i].second);
  }
  CHECK(checkpoint_hash(loaded) == checkpoint_hash(result.checkpoint));

  // predictions through the loaded checkpoint equal the live model's bitwise
  std::vector<Prediction> live = predict_split(*model, val_ds);
  std::vector<Prediction> thawed = predict_with_checkpoint(loaded, val_ds);
  REQUIRE(live.size() == thawed.size());
  for (std::size_t j = 0; j < live.size(); ++j) {
    CHECK(live[j].post_id == thawed[j].post_id);
    CHECK(live[j].score == thawed[j].score);
    CHECK(live[j].label == thawed[j].label);
  }
}

TEST_CASE("checkpoint refuses foreign embeddings and damage") {
  EncodedDataset train_ds = planted_dataset(16, 8, 7701, "train");
  EncodedDataset val_ds = planted_dataset(8, 8, 7702, "val");
  auto model = make_model(FusionModelConfig::preset(Architecture::MLP_CLIP, 8, 8), 5);
  TrainingConfig tcfg = TrainingConfig::preset(Architecture::MLP_CLIP, 5);
  tcfg.epochs = 1;
  TrainResult result = train(*model, train_ds, val_ds, tcfg);

  EncodedDataset foreign = val_ds;
  foreign.text_encoder = "text-transformer";
  CHECK_THROWS_AS(predict_with_checkpoint(result.checkpoint, foreign), CacheKeyMismatchError);

  Checkpoint bent = result.checkpoint;
  bent.tensors[0].first = "nonsense";
  CHECK_THROWS_AS(model_from_checkpoint(bent), SchemaMismatchError);

  fs::path dir = temp_dir("ckpt_damage");
  std::string path = (dir / "model.ckpt").string();
  save_checkpoint(path, result.checkpoint);
  std::string bytes = serialize_checkpoint(result.checkpoint);
  std::ofstream(path, std::ios::binary | std::ios::trunc)
      .write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(path), SchemaMismatchError);
  CHECK_THROWS_AS(load_checkpoint((dir / "absent.ckpt").string()), MissingCacheError);
}

TEST_CASE("predict_split is order-preserving, rerunnable, and empty-safe") {
  EncodedDataset ds = planted_dataset(10, 8, 7801, "test");
  auto model = make_model(FusionModelConfig::preset(Architecture::MLP_CLIP, 8, 8), 3);
  std::vector<Prediction> a = predict_split(*model, ds);
  std::vector<Prediction> b = predict_split(*model, ds);
  REQUIRE(a.size() == 10);
  CHECK(a == b);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a[j].post_id == ds.ids[j]);
    CHECK(a[j].label == label_for_score(a[j].score));
  }
  EncodedDataset empty;
  CHECK(predict_split(*model, empty).empty());
}

TEST_CASE("mmbt trains end to end on token-separable data") {
  // REAL and FAKE texts use disjoint vocabularies; the transformer only has
  // to read the tokens, so a few epochs must separate them.
  auto build = [](int n, std::uint64_t seed, const std::string& name) {
    EncodedDataset ds = random_dataset(n, 5, 7, seed);
    ds.ids.clear();
    for (int j = 0; j < n; ++j) {
      ds.ids.push_back(name + "/" + std::to_string(j));
      ds.texts[static_cast<std::size_t>(j)] =
          j % 2 == 0 ? "confirmed report verified sources" : "hoax rumor fabricated nonsense";
      ds.labels[static_cast<std::size_t>(j)] = j % 2 == 0 ? Label::REAL : Label::FAKE;
    }
    return ds;
  };
  EncodedDataset train_ds = build(24, 811, "train");
  EncodedDataset val_ds = build(8, 812, "val");

  FusionModelConfig cfg = tiny_mmbt_config();
  cfg.mmbt.vocab_size = 64;
  cfg.mmbt.max_seq = 16;
  cfg.mmbt.d_model = 16;
  cfg.mmbt.num_layers = 1;
  cfg.mmbt.ff_dim = 32;
  auto model = make_model(cfg, 19);
  TrainingConfig tcfg = TrainingConfig::preset(Architecture::CLIP_MMBT, 19);
  tcfg.epochs = 10;
  tcfg.batch_size = 8;
  tcfg.learning_rate = 1e-2;  // desk-scale widths take a larger step than the preset
  TrainResult result = train(*model, train_ds, val_ds, tcfg);

  CHECK(result.best_val_loss < result.log.front().val_loss);
  std::vector<Prediction> preds = predict_split(*model, val_ds);
  int hits = 0;
  for (std::size_t j = 0; j < preds.size(); ++j)
    if (preds[j].label == val_ds.labels[j]) ++hits;
  CHECK(hits >= 7);  // 8 held-out posts
}

TEST_CASE("training log round-trips") {
  std::vector<EpochRecord> log{{0, 0.9, 0.8, 0.1}, {1, 0.5, 0.45, 2.3}, {2, 0.4, 0.47, 2.2}};
  fs::path dir = temp_dir("log");
  std::string path = (dir / "train.log").string();
  write_training_log(path, log);
  CHECK(read_training_log(path) == log);
  CHECK_THROWS_AS(read_training_log((dir / "absent.log").string()), MissingCacheError);
}
