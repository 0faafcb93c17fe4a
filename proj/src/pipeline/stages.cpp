#include "mmfnd/pipeline/stages.hpp"

#include <fstream>
#include <optional>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/image_store.hpp"
#include "mmfnd/core/manifest.hpp"
#include "mmfnd/encode/cache.hpp"
#include "mmfnd/eval/ensemble.hpp"
#include "mmfnd/eval/grid.hpp"
#include "mmfnd/eval/predictions_io.hpp"
#include "mmfnd/fixtures/fixtures.hpp"
#include "mmfnd/fusion/checkpoint.hpp"
#include "mmfnd/fusion/config.hpp"
#include "mmfnd/fusion/dataset.hpp"
#include "mmfnd/fusion/trainer.hpp"
#include "mmfnd/ingest/adapters.hpp"
#include "mmfnd/manip/corpus_pass.hpp"
#include "mmfnd/manip/provenance.hpp"
#include "mmfnd/pipeline/vnme.hpp"

namespace mmfnd::pipeline {

using nlohmann::json;

namespace {

template <typename T>
T param(const json& params, const std::string& key) {
  if (!params.contains(key)) throw ConfigInvalidError("missing parameter: " + key);
  try {
    return params.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigInvalidError("parameter " + key + ": " + e.what());
  }
}

template <typename T>
T param_or(const json& params, const std::string& key, T fallback) {
  if (!params.contains(key)) return fallback;
  return param<T>(params, key);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EncodingError("cannot write " + path.string());
  out << content;
}

json report_to_json(const eval::EvalReport& r) {
  return json{{"set", r.set_name},
              {"n_fake", r.n_fake},
              {"n_real", r.n_real},
              {"predicted_fake", r.predicted_fake},
              {"predicted_real", r.predicted_real},
              {"confusion",
               {{"tp", r.confusion.tp},
                {"fp", r.confusion.fp},
                {"fn", r.confusion.fn},
                {"tn", r.confusion.tn}}},
              {"averaging", std::string(eval::to_string(r.averaging))},
              {"accuracy", r.accuracy},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f1", r.f1},
              {"zero_division", r.zero_division}};
}

// --- stage implementations -------------------------------------------------

std::vector<StageOutput> run_fixture(const StageContext& ctx) {
  fixtures::SyntheticCorpusSpec spec;
  if (has_input(ctx, "spec")) {
    spec = fixtures::SyntheticCorpusSpec::load(require_input(ctx, "spec"));
  } else if (ctx.params.contains("spec")) {
    spec = fixtures::SyntheticCorpusSpec::from_json(ctx.params.at("spec"));
  } else {
    throw ConfigInvalidError("fixture stage needs a 'spec' input file or parameter");
  }
  fixtures::write_synthetic_fixture(spec, ctx.out_dir);
  return {{"train_manifest", "train.manifest.tsv", true},
          {"validation_manifest", "validation.manifest.tsv", true},
          {"test_manifest", "test.manifest.tsv", true},
          {"images_dir", "images", true},
          {"aliases", "aliases.json", true},
          {"tagger", "tagger.json", true},
          {"entities", "entities.json", true},
          {"curated", "curated.json", true},
          {"annotations", "annotations.tsv", true},
          {"fixture_file", "fixture.json", true}};
}

std::vector<StageOutput> run_ingest(const StageContext& ctx) {
  const auto format = param<std::string>(ctx.params, "format");
  ingest::ColumnMap map;
  if (has_input(ctx, "column_map")) {
    map = ingest::ColumnMap::load(require_input(ctx, "column_map"));
  }
  ingest::IngestOptions opts;
  opts.origin = origin_from_string(param<std::string>(ctx.params, "origin"));
  opts.permissive = param_or(ctx.params, "permissive", false);
  opts.humor_is_fake = param_or(ctx.params, "humor_is_fake", true);

  ImageStore store(ctx.out_dir / "images", /*create_dirs=*/true);
  const auto& source = require_input(ctx, "source_dir");
  DatasetSplit split;
  if (format == "mediaeval") {
    split = ingest::ingest_mediaeval_corpus(source, map, store, opts);
  } else if (format == "visualnews") {
    split = ingest::ingest_visualnews_corpus(source, map, store, opts);
  } else {
    throw ConfigInvalidError("unknown ingest format: " + format);
  }
  write_manifest(split, ctx.out_dir / "corpus.manifest.tsv");
  return {{"manifest", "corpus.manifest.tsv", true}, {"images_dir", "images", true}};
}

std::vector<StageOutput> run_manipulate(const StageContext& ctx) {
  const auto technique =
      technique_from_string(param<std::string>(ctx.params, "technique"));
  const DatasetSplit input = read_manifest(require_input(ctx, "manifest"));

  std::optional<manip::AliasTable> aliases;
  if (has_input(ctx, "aliases")) {
    aliases = manip::AliasTable::load(require_input(ctx, "aliases"));
  }
  std::optional<manip::RuleTagger> tagger;
  if (has_input(ctx, "tagger")) {
    tagger = manip::RuleTagger::load(require_input(ctx, "tagger"));
  }
  manip::CuratedMap curated;
  if (has_input(ctx, "curated")) {
    curated = manip::load_curated_map(require_input(ctx, "curated"));
  }
  manip::EntityIndex entities;
  if (has_input(ctx, "entities")) {
    entities = manip::load_entity_index(require_input(ctx, "entities"));
  }

  manip::PassOptions options;
  options.seed = ctx.seed;
  if (param_or<std::string>(ctx.params, "pool_scope", "same_split") == "whole_set") {
    options.pool_scope = manip::PoolScope::WHOLE_SET;
  }
  if (aliases) options.aliases = &*aliases;
  if (tagger) options.tagger = &*tagger;
  if (!curated.empty()) options.curated = &curated;
  if (!entities.empty()) options.entity_index = &entities;

  auto result = manip::apply_technique(input, technique, options);

  if (has_input(ctx, "annotations") && !result.pending.empty()) {
    auto rows = manip::read_annotation_rows(require_input(ctx, "annotations"));
    std::erase_if(rows, [&](const auto& row) { return !result.pending.pending(row.first); });
    result.pending.import_annotations(rows, result.split, &result.records);
  }

  write_manifest(result.split, ctx.out_dir / "derived.manifest.tsv");
  manip::write_provenance(result.provenance(), ctx.out_dir / "provenance.jsonl");
  std::string skipped;
  for (const auto& s : result.skipped) skipped += s.id + "\t" + s.reason + "\n";
  write_text(ctx.out_dir / "skipped.tsv", skipped);
  std::string pending;
  for (const auto& id : result.pending.ids()) pending += id + "\n";
  write_text(ctx.out_dir / "pending.txt", pending);
  return {{"manifest", "derived.manifest.tsv", true},
          {"provenance", "provenance.jsonl", true},
          {"skipped", "skipped.tsv", true},
          {"pending", "pending.txt", true}};
}

std::vector<StageOutput> run_vnme(const StageContext& ctx) {
  const auto sources = input_list(ctx, "sources");
  if (sources.empty()) throw ConfigInvalidError("vnme stage needs 'sources' manifests");
  make_vnme(sources, ctx.out_dir);
  return {{"img", "vnme-img.manifest.tsv", true},
          {"evt", "vnme-evt.manifest.tsv", true},
          {"all", "vnme-all.manifest.tsv", true}};
}

std::vector<StageOutput> run_encode(const StageContext& ctx) {
  const DatasetSplit split = read_manifest(require_input(ctx, "manifest"));
  const ImageStore store(require_input(ctx, "images_dir"));

  encode::MockOptions mock;
  // Mock embeddings are pure functions of content (like a frozen pretrained
  // encoder), so the noise seed is a parameter, not the stage seed.
  mock.seed = param_or<std::uint64_t>(ctx.params, "mock_seed", 0);
  mock.planted_pairs = param_or(ctx.params, "planted", true);
  mock.signal_alpha = param_or(ctx.params, "signal_strength", 0.85);

  auto text = encode::make_encoder(
      parse_encoder_spec(param<std::string>(ctx.params, "text_encoder")), mock);
  auto image = encode::make_encoder(
      parse_encoder_spec(param<std::string>(ctx.params, "image_encoder")), mock);
  encode::encode_or_load(split, store, *text, *image, ctx.out_dir / "embeddings.bin");
  return {{"embeddings", "embeddings.bin", true}};
}

fusion::EncodedDataset load_dataset(const std::filesystem::path& manifest,
                                    const std::filesystem::path& embeddings) {
  const DatasetSplit split = read_manifest(manifest);
  const auto pairs = encode::load_embeddings(embeddings);
  return fusion::EncodedDataset::from_split(split, pairs);
}

std::vector<StageOutput> run_train(const StageContext& ctx) {
  const auto arch =
      fusion::architecture_from_string(param<std::string>(ctx.params, "arch"));
  auto train_ds = load_dataset(require_input(ctx, "train_manifest"),
                               require_input(ctx, "train_embeddings"));
  auto val_ds = load_dataset(require_input(ctx, "val_manifest"),
                             require_input(ctx, "val_embeddings"));

  auto mcfg = fusion::FusionModelConfig::preset(arch, static_cast<int>(train_ds.text.rows()),
                                                static_cast<int>(train_ds.image.rows()));
  auto tcfg = fusion::TrainingConfig::preset(arch, ctx.seed);
  tcfg.epochs = param_or(ctx.params, "epochs", tcfg.epochs);
  tcfg.batch_size = param_or(ctx.params, "batch_size", tcfg.batch_size);
  tcfg.learning_rate = param_or(ctx.params, "learning_rate", tcfg.learning_rate);
  tcfg.class_weights = param_or(ctx.params, "class_weights", tcfg.class_weights);

  auto model = fusion::make_model(mcfg, ctx.seed);
  auto result = fusion::train(*model, train_ds, val_ds, tcfg);

  fusion::save_checkpoint((ctx.out_dir / "checkpoint.bin").string(), result.checkpoint);
  fusion::write_training_log((ctx.out_dir / "training_log.jsonl").string(), result.log);
  json summary{{"arch", std::string(fusion::to_string(arch))},
               {"epochs", tcfg.epochs},
               {"batch_size", tcfg.batch_size},
               {"best_epoch", result.best_epoch},
               {"best_val_loss", result.best_val_loss},
               {"checkpoint_hash", fusion::checkpoint_hash(result.checkpoint)}};
  write_text(ctx.out_dir / "summary.json", summary.dump(2) + "\n");
  // The log carries wall-clock times; keep it out of the hashed manifest.
  return {{"checkpoint", "checkpoint.bin", true},
          {"summary", "summary.json", true},
          {"training_log", "training_log.jsonl", false}};
}

std::vector<StageOutput> run_predict(const StageContext& ctx) {
  const auto ckpt = fusion::load_checkpoint(require_input(ctx, "checkpoint").string());
  auto ds = load_dataset(require_input(ctx, "manifest"), require_input(ctx, "embeddings"));
  const auto preds = fusion::predict_with_checkpoint(ckpt, ds);
  eval::write_predictions((ctx.out_dir / "predictions.tsv").string(), preds);
  return {{"predictions", "predictions.tsv", true}};
}

std::vector<StageOutput> run_evaluate(const StageContext& ctx) {
  const auto preds =
      eval::read_predictions(require_input(ctx, "predictions").string());
  const DatasetSplit split = read_manifest(require_input(ctx, "manifest"));
  const auto averaging = eval::averaging_from_string(
      param_or<std::string>(ctx.params, "averaging", "macro"));
  const auto set_name = param_or<std::string>(ctx.params, "set_name", split.name);

  const auto report =
      eval::compute_metrics(preds, eval::labeled_ids(split), averaging, set_name);
  write_text(ctx.out_dir / "report.txt", eval::render_eval_report_text(report));
  write_text(ctx.out_dir / "metrics.json", report_to_json(report).dump(2) + "\n");
  return {{"report", "report.txt", true}, {"metrics", "metrics.json", true}};
}

std::vector<StageOutput> run_grid(const StageContext& ctx) {
  const auto model_names = param<std::vector<std::string>>(ctx.params, "model_names");
  const auto set_names = param<std::vector<std::string>>(ctx.params, "set_names");
  const auto checkpoints = input_list(ctx, "checkpoints");
  const auto manifests = input_list(ctx, "set_manifests");
  const auto embeddings = input_list(ctx, "set_embeddings");
  if (checkpoints.size() != model_names.size()) {
    throw ConfigInvalidError("grid: model_names and checkpoints disagree in length");
  }
  if (manifests.size() != set_names.size() || embeddings.size() != set_names.size()) {
    throw ConfigInvalidError("grid: set_names, set_manifests and set_embeddings "
                             "must align");
  }

  std::vector<eval::NamedSet> sets;
  std::map<std::string, std::map<std::string, std::vector<fusion::Prediction>>> scored;
  for (std::size_t s = 0; s < set_names.size(); ++s) {
    const DatasetSplit split = read_manifest(manifests[s]);
    sets.push_back({set_names[s], eval::labeled_ids(split)});
    auto ds = load_dataset(manifests[s], embeddings[s]);
    for (std::size_t m = 0; m < model_names.size(); ++m) {
      const auto ckpt = fusion::load_checkpoint(checkpoints[m].string());
      scored[model_names[m]][set_names[s]] = fusion::predict_with_checkpoint(ckpt, ds);
    }
  }

  auto all_rows = model_names;
  const bool with_ensemble = param_or(ctx.params, "ensemble", false);
  if (with_ensemble) all_rows.push_back("ensemble");
  const auto averaging = eval::averaging_from_string(
      param_or<std::string>(ctx.params, "averaging", "macro"));

  const auto predict = [&](const std::string& model,
                           const eval::NamedSet& set) -> std::vector<fusion::Prediction> {
    if (model == "ensemble") {
      std::vector<std::vector<fusion::Prediction>> members;
      for (const auto& name : model_names) members.push_back(scored.at(name).at(set.name));
      return eval::majority_vote(members);
    }
    return scored.at(model).at(set.name);
  };
  const auto table = eval::evaluate_manipulation_grid(all_rows, sets, predict, averaging);
  write_text(ctx.out_dir / "grid.csv", eval::render_grid_csv(table));
  write_text(ctx.out_dir / "grid.txt", eval::render_grid_text(table));
  return {{"csv", "grid.csv", true}, {"text", "grid.txt", true}};
}

std::vector<StageOutput> run_ensemble(const StageContext& ctx) {
  const auto member_paths = input_list(ctx, "predictions");
  std::vector<std::vector<fusion::Prediction>> members;
  members.reserve(member_paths.size());
  for (const auto& path : member_paths) {
    members.push_back(eval::read_predictions(path.string()));
  }
  const auto voted = eval::majority_vote(members);
  eval::write_predictions((ctx.out_dir / "predictions.tsv").string(), voted);
  return {{"predictions", "predictions.tsv", true}};
}

}  // namespace

const std::map<std::string, StageFn>& stage_registry() {
  static const std::map<std::string, StageFn> registry = {
      {"fixture", run_fixture},   {"ingest", run_ingest},
      {"manipulate", run_manipulate}, {"vnme", run_vnme},
      {"encode", run_encode},     {"train", run_train},
      {"predict", run_predict},   {"evaluate", run_evaluate},
      {"grid", run_grid},         {"ensemble", run_ensemble},
  };
  return registry;
}

const std::filesystem::path& require_input(const StageContext& ctx,
                                           const std::string& key) {
  const auto it = ctx.inputs.find(key);
  if (it == ctx.inputs.end() || it->second.empty()) {
    throw ConfigInvalidError("missing input: " + key);
  }
  if (it->second.size() != 1) {
    throw ConfigInvalidError("input " + key + " must be a single file");
  }
  return it->second.front();
}

std::vector<std::filesystem::path> input_list(const StageContext& ctx,
                                              const std::string& key) {
  const auto it = ctx.inputs.find(key);
  return it == ctx.inputs.end() ? std::vector<std::filesystem::path>{} : it->second;
}

bool has_input(const StageContext& ctx, const std::string& key) {
  const auto it = ctx.inputs.find(key);
  return it != ctx.inputs.end() && !it->second.empty();
}

encode::EncoderSpec parse_encoder_spec(const std::string& name) {
  if (name.rfind("mock-", 0) == 0) {
    const auto rest = name.substr(5);
    const auto dash = rest.find('-');
    if (dash != std::string::npos) {
      const auto modality = rest.substr(0, dash);
      const int dim = std::atoi(rest.c_str() + dash + 1);
      if (dim <= 0) throw ConfigInvalidError("bad mock encoder dim: " + name);
      if (modality == "text") return encode::EncoderSpec::mock(encode::Modality::TEXT, dim);
      if (modality == "image") {
        return encode::EncoderSpec::mock(encode::Modality::IMAGE, dim);
      }
      if (modality == "joint") {
        return encode::EncoderSpec::mock(encode::Modality::JOINT, dim);
      }
    }
    throw ConfigInvalidError("bad mock encoder spec: " + name +
                             " (want mock-<modality>-<dim>)");
  }
  return encode::EncoderSpec::preset(name);
}

}  // namespace mmfnd::pipeline
