#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

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
#include "mmfnd/pipeline/runner.hpp"
#include "mmfnd/pipeline/stages.hpp"
#include "mmfnd/pipeline/vnme.hpp"

namespace fs = std::filesystem;
using namespace mmfnd;

namespace {

fusion::EncodedDataset dataset_from(const std::string& manifest, const std::string& cache) {
  const DatasetSplit split = read_manifest(manifest);
  const auto pairs = encode::load_embeddings(cache);
  return fusion::EncodedDataset::from_split(split, pairs);
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

// "name=path" option values for --models / --sets.
std::pair<std::string, std::string> split_assignment(const std::string& value,
                                                     const std::string& option) {
  const auto eq = value.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == value.size()) {
    throw ConfigInvalidError(option + " wants name=path, got '" + value + "'");
  }
  return {value.substr(0, eq), value.substr(eq + 1)};
}

struct IngestArgs {
  std::string format, source, out, origin, column_map, images;
  bool permissive = false;
  bool humor_is_real = false;
};

void cmd_ingest(const IngestArgs& a) {
  ingest::ColumnMap map;
  if (!a.column_map.empty()) map = ingest::ColumnMap::load(a.column_map);
  ingest::IngestOptions opts;
  opts.origin = origin_from_string(a.origin);
  opts.permissive = a.permissive;
  opts.humor_is_fake = !a.humor_is_real;

  const fs::path out(a.out);
  const fs::path images = a.images.empty() ? out.parent_path() / "images" : fs::path(a.images);
  ImageStore store(images, /*create_dirs=*/true);
  DatasetSplit split;
  if (a.format == "mediaeval") {
    split = ingest::ingest_mediaeval_corpus(a.source, map, store, opts);
  } else {
    split = ingest::ingest_visualnews_corpus(a.source, map, store, opts);
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_manifest(split, out);
  std::cout << split.size() << " posts (" << split.fake_count << " fake, "
            << split.real_count << " real) -> " << a.out << "\n"
            << "images -> " << images.string() << "\n";
}

struct ManipArgs {
  std::string technique, in, out, alias_table, curated_map, annotations, tagger,
      entities, provenance, pool_scope = "same_split";
  std::uint64_t seed = 0;
};

void cmd_manipulate(const ManipArgs& a) {
  const DatasetSplit input = read_manifest(a.in);

  std::optional<manip::AliasTable> aliases;
  if (!a.alias_table.empty()) aliases = manip::AliasTable::load(a.alias_table);
  std::optional<manip::RuleTagger> tagger;
  if (!a.tagger.empty()) tagger = manip::RuleTagger::load(a.tagger);
  manip::CuratedMap curated;
  if (!a.curated_map.empty()) curated = manip::load_curated_map(a.curated_map);
  manip::EntityIndex entities;
  if (!a.entities.empty()) entities = manip::load_entity_index(a.entities);

  manip::PassOptions options;
  options.seed = a.seed;
  if (a.pool_scope == "whole_set") options.pool_scope = manip::PoolScope::WHOLE_SET;
  if (aliases) options.aliases = &*aliases;
  if (tagger) options.tagger = &*tagger;
  if (!curated.empty()) options.curated = &curated;
  if (!entities.empty()) options.entity_index = &entities;

  auto result = manip::apply_technique(input, technique_from_string(a.technique), options);
  if (!a.annotations.empty() && !result.pending.empty()) {
    auto rows = manip::read_annotation_rows(a.annotations);
    std::erase_if(rows, [&](const auto& row) { return !result.pending.pending(row.first); });
    result.pending.import_annotations(rows, result.split, &result.records);
  }

  ensure_parent(a.out);
  write_manifest(result.split, a.out);
  const std::string sidecar =
      a.provenance.empty() ? a.out + ".provenance.jsonl" : a.provenance;
  ensure_parent(sidecar);
  manip::write_provenance(result.provenance(), sidecar);
  std::cout << result.split.size() << " derived posts -> " << a.out << "\n"
            << "provenance -> " << sidecar << "\n";
  if (!result.skipped.empty()) {
    std::cout << result.skipped.size() << " posts skipped\n";
  }
  if (!result.pending.empty()) {
    std::cout << result.pending.size() << " posts pending annotation\n";
  }
}

struct EncodeArgs {
  std::string manifest, images, cache;
  std::string text_encoder = "text-transformer";
  std::string image_encoder = "image-residual";
  bool mock = false;
  int dim = 64;
  std::uint64_t seed = 0;
  double signal = 0.85;
  bool no_planted = false;
};

void cmd_encode(const EncodeArgs& a) {
  const DatasetSplit split = read_manifest(a.manifest);
  const ImageStore store(a.images);
  encode::MockOptions mock{a.seed, !a.no_planted, a.signal};
  const auto text_spec = a.mock ? encode::EncoderSpec::mock(encode::Modality::TEXT, a.dim)
                                : pipeline::parse_encoder_spec(a.text_encoder);
  const auto image_spec = a.mock
                              ? encode::EncoderSpec::mock(encode::Modality::IMAGE, a.dim)
                              : pipeline::parse_encoder_spec(a.image_encoder);
  auto text = encode::make_encoder(text_spec, mock);
  auto image = encode::make_encoder(image_spec, mock);
  ensure_parent(a.cache);
  const auto pairs = encode::encode_or_load(split, store, *text, *image, a.cache);
  std::cout << pairs.size() << " embedding pairs (" << text->spec().name << " + "
            << image->spec().name << ") -> " << a.cache << "\n";
}

struct TrainArgs {
  std::string arch, out, log;
  std::vector<std::string> train, val;  // manifest + cache
  int epochs = -1, batch_size = -1;
  double learning_rate = 0.0;
  bool class_weights = false;
  std::uint64_t seed = 0;
};

void cmd_train(const TrainArgs& a) {
  const auto arch = fusion::architecture_from_string(a.arch);
  auto train_ds = dataset_from(a.train[0], a.train[1]);
  auto val_ds = dataset_from(a.val[0], a.val[1]);

  auto mcfg = fusion::FusionModelConfig::preset(arch, static_cast<int>(train_ds.text.rows()),
                                                static_cast<int>(train_ds.image.rows()));
  auto tcfg = fusion::TrainingConfig::preset(arch, a.seed);
  if (a.epochs > 0) tcfg.epochs = a.epochs;
  if (a.batch_size > 0) tcfg.batch_size = a.batch_size;
  if (a.learning_rate > 0) tcfg.learning_rate = a.learning_rate;
  tcfg.class_weights = a.class_weights;

  auto model = fusion::make_model(mcfg, a.seed);
  const auto result = fusion::train(*model, train_ds, val_ds, tcfg);
  ensure_parent(a.out);
  fusion::save_checkpoint(a.out, result.checkpoint);
  const std::string log = a.log.empty() ? a.out + ".log.jsonl" : a.log;
  ensure_parent(log);
  fusion::write_training_log(log, result.log);
  std::cout << "best epoch " << result.best_epoch << " (val loss "
            << result.best_val_loss << ") -> " << a.out << "\n"
            << "training log -> " << log << "\n";
}

struct PredictArgs {
  std::string ckpt, out;
  std::vector<std::string> in;  // manifest + cache
};

void cmd_predict(const PredictArgs& a) {
  const auto ckpt = fusion::load_checkpoint(a.ckpt);
  auto ds = dataset_from(a.in[0], a.in[1]);
  const auto preds = fusion::predict_with_checkpoint(ckpt, ds);
  ensure_parent(a.out);
  eval::write_predictions(a.out, preds);
  std::cout << preds.size() << " predictions -> " << a.out << "\n";
}

struct EvaluateArgs {
  std::string preds, manifest, averaging = "macro", set_name, json_out;
};

void cmd_evaluate(const EvaluateArgs& a) {
  const auto preds = eval::read_predictions(a.preds);
  const DatasetSplit split = read_manifest(a.manifest);
  const auto report =
      eval::compute_metrics(preds, eval::labeled_ids(split),
                            eval::averaging_from_string(a.averaging),
                            a.set_name.empty() ? split.name : a.set_name);
  std::cout << eval::render_eval_report_text(report);
  if (!a.json_out.empty()) {
    nlohmann::json j{{"set", report.set_name},
                     {"accuracy", report.accuracy},
                     {"precision", report.precision},
                     {"recall", report.recall},
                     {"f1", report.f1},
                     {"averaging", eval::to_string(report.averaging)},
                     {"zero_division", report.zero_division}};
    ensure_parent(a.json_out);
    std::ofstream out(a.json_out, std::ios::binary);
    if (!out) throw EncodingError("cannot write " + a.json_out);
    out << j.dump(2) << "\n";
  }
}

struct GridArgs {
  std::vector<std::string> models;  // name=checkpoint
  std::vector<std::string> sets;    // name=manifest,cache
  std::string out, averaging = "macro";
  bool ensemble = false;
};

void cmd_grid(const GridArgs& a) {
  std::vector<std::string> model_names;
  std::map<std::string, fusion::Checkpoint> checkpoints;
  for (const auto& entry : a.models) {
    auto [name, path] = split_assignment(entry, "--models");
    model_names.push_back(name);
    checkpoints.emplace(name, fusion::load_checkpoint(path));
  }

  std::vector<eval::NamedSet> sets;
  std::map<std::string, std::map<std::string, std::vector<fusion::Prediction>>> scored;
  for (const auto& entry : a.sets) {
    auto [name, spec] = split_assignment(entry, "--sets");
    const auto comma = spec.find(',');
    if (comma == std::string::npos) {
      throw ConfigInvalidError("--sets wants name=manifest,cache, got '" + entry + "'");
    }
    const auto manifest = spec.substr(0, comma);
    const auto cache = spec.substr(comma + 1);
    const DatasetSplit split = read_manifest(manifest);
    sets.push_back({name, eval::labeled_ids(split)});
    auto ds = dataset_from(manifest, cache);
    for (const auto& model : model_names) {
      scored[model][name] = fusion::predict_with_checkpoint(checkpoints.at(model), ds);
    }
  }

  auto rows = model_names;
  if (a.ensemble) rows.push_back("ensemble");
  const auto predict = [&](const std::string& model,
                           const eval::NamedSet& set) -> std::vector<fusion::Prediction> {
    if (model == "ensemble") {
      std::vector<std::vector<fusion::Prediction>> members;
      for (const auto& name : model_names) members.push_back(scored.at(name).at(set.name));
      return eval::majority_vote(members);
    }
    return scored.at(model).at(set.name);
  };
  const auto table = eval::evaluate_manipulation_grid(
      rows, sets, predict, eval::averaging_from_string(a.averaging));

  fs::create_directories(a.out);
  const auto csv_path = fs::path(a.out) / "grid.csv";
  const auto txt_path = fs::path(a.out) / "grid.txt";
  const auto text = eval::render_grid_text(table);
  std::ofstream(csv_path, std::ios::binary) << eval::render_grid_csv(table);
  std::ofstream(txt_path, std::ios::binary) << text;
  std::cout << text << "grid -> " << csv_path.string() << ", " << txt_path.string()
            << "\n";
}

struct EnsembleArgs {
  std::vector<std::string> members;  // checkpoints
  std::vector<std::string> in;       // manifest + one cache, or one per member
  std::string out, spec_out;
};

void cmd_ensemble(const EnsembleArgs& a) {
  if (a.in.size() != 2 && a.in.size() != a.members.size() + 1) {
    throw ConfigInvalidError(
        "--in wants <manifest> <cache> or <manifest> plus one cache per member");
  }
  std::vector<std::vector<fusion::Prediction>> all;
  for (std::size_t m = 0; m < a.members.size(); ++m) {
    const auto& cache = a.in.size() == 2 ? a.in[1] : a.in[m + 1];
    const auto ckpt = fusion::load_checkpoint(a.members[m]);
    all.push_back(fusion::predict_with_checkpoint(ckpt, dataset_from(a.in[0], cache)));
  }
  const auto voted = eval::majority_vote(all);
  ensure_parent(a.out);
  eval::write_predictions(a.out, voted);
  if (!a.spec_out.empty()) {
    eval::EnsembleSpec spec;
    spec.member_checkpoints = a.members;
    ensure_parent(a.spec_out);
    spec.save(a.spec_out);
  }
  std::cout << voted.size() << " ensemble predictions (" << a.members.size()
            << " members) -> " << a.out << "\n";
}

struct FixturesArgs {
  std::string spec, out, mini_me, mini_vn;
};

void cmd_fixtures(const FixturesArgs& a) {
  if (a.spec.empty() && a.mini_me.empty() && a.mini_vn.empty()) {
    throw ConfigInvalidError("fixtures: pass --spec/--out, --mini-me or --mini-vn");
  }
  if (!a.spec.empty()) {
    if (a.out.empty()) throw ConfigInvalidError("fixtures: --spec needs --out");
    const auto spec = fixtures::SyntheticCorpusSpec::load(a.spec);
    const auto paths = fixtures::write_synthetic_fixture(spec, a.out);
    std::cout << "synthetic fixture (" << spec.n_train << "/" << spec.n_val << "/"
              << spec.n_test << ", signal " << spec.signal_strength << ") -> "
              << paths.root.string() << "\n";
  }
  if (!a.mini_me.empty()) {
    fixtures::write_mediaeval_mini(a.mini_me);
    std::cout << "mediaeval mini tree -> " << a.mini_me << "\n";
  }
  if (!a.mini_vn.empty()) {
    fixtures::write_visualnews_mini(a.mini_vn);
    std::cout << "visualnews mini tree -> " << a.mini_vn << "\n";
  }
}

struct VnmeArgs {
  std::vector<std::string> manifests;
  std::string out;
};

void cmd_make_vnme(const VnmeArgs& a) {
  std::vector<fs::path> manifests(a.manifests.begin(), a.manifests.end());
  const auto paths = pipeline::make_vnme(manifests, a.out);
  for (const auto* path : {&paths.img, &paths.evt, &paths.all}) {
    std::cout << read_manifest(*path).size() << " posts -> " << path->string() << "\n";
  }
}

struct RunArgs {
  std::string config;
  bool dry_run = false;
};

void cmd_run(const RunArgs& a) {
  const auto config = pipeline::RunConfig::load(a.config);
  if (a.dry_run) {
    std::cout << pipeline::dry_run_text(config);
    return;
  }
  const auto result = pipeline::run(config);
  for (const auto& stage : result.stages) {
    std::cout << (stage.cached ? "cached " : "ran    ") << stage.name << " ("
              << stage.key.substr(0, 12) << ")\n";
  }
  std::cout << "run manifest -> " << result.manifest_path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multimodal fake-news detection toolkit"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "raw corpus directory -> manifest");
  ingest->add_option("--format", ingest_args.format, "source layout")
      ->required()
      ->check(CLI::IsMember({"mediaeval", "visualnews"}));
  ingest->add_option("--source", ingest_args.source, "corpus directory")->required();
  ingest->add_option("--out", ingest_args.out, "output manifest path")->required();
  ingest->add_option("--origin", ingest_args.origin, "id namespace")
      ->required()
      ->check(CLI::IsMember({"me2015", "me2016", "vn", "synthetic"}));
  ingest->add_option("--images", ingest_args.images,
                     "image store directory (default: <out dir>/images)");
  ingest->add_option("--column-map", ingest_args.column_map, "column mapping json");
  ingest->add_flag("--permissive", ingest_args.permissive, "skip bad records with a log");
  ingest->add_flag("--humor-is-real", ingest_args.humor_is_real,
                   "map the humor tag to real instead of fake");
  ingest->callback([&] { cmd_ingest(ingest_args); });

  ManipArgs manip_args;
  auto* manipulate = app.add_subcommand("manipulate", "derive manipulated posts");
  manipulate->add_option("--technique", manip_args.technique, "manipulation")
      ->required()
      ->check(CLI::IsMember({"evtrep", "evtrem", "fakeim", "realim", "entrep"}));
  manipulate->add_option("--in", manip_args.in, "input manifest")->required();
  manipulate->add_option("--out", manip_args.out, "output manifest")->required();
  manipulate->add_option("--seed", manip_args.seed, "pass seed");
  manipulate->add_option("--alias-table", manip_args.alias_table, "event aliases json");
  manipulate->add_option("--curated-map", manip_args.curated_map, "curated images json");
  manipulate->add_option("--annotations", manip_args.annotations,
                         "evtrem label rows (post_id<TAB>label)");
  manipulate->add_option("--tagger", manip_args.tagger, "entity tagger rules json");
  manipulate->add_option("--entities", manip_args.entities, "entity index json");
  manipulate->add_option("--provenance", manip_args.provenance,
                         "sidecar path (default: <out>.provenance.jsonl)");
  manipulate->add_option("--pool-scope", manip_args.pool_scope, "replacement pool scope")
      ->check(CLI::IsMember({"same_split", "whole_set"}));
  manipulate->callback([&] { cmd_manipulate(manip_args); });

  EncodeArgs encode_args;
  auto* encode_cmd = app.add_subcommand("encode", "manifest -> embedding cache");
  encode_cmd->add_option("--manifest", encode_args.manifest, "input manifest")->required();
  encode_cmd->add_option("--images", encode_args.images, "image store directory")
      ->required();
  encode_cmd->add_option("--cache", encode_args.cache, "output cache path")->required();
  encode_cmd->add_option("--text-encoder", encode_args.text_encoder, "text preset");
  encode_cmd->add_option("--image-encoder", encode_args.image_encoder, "image preset");
  encode_cmd->add_flag("--mock", encode_args.mock, "use desk-scale mock encoders");
  encode_cmd->add_option("--dim", encode_args.dim, "mock embedding dim");
  encode_cmd->add_option("--seed", encode_args.seed, "mock noise seed");
  encode_cmd->add_option("--signal", encode_args.signal, "planted-pair mixing weight");
  encode_cmd->add_flag("--no-planted", encode_args.no_planted, "pure-noise mocks");
  encode_cmd->callback([&] { cmd_encode(encode_args); });

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit a fusion head");
  train->add_option("--arch", train_args.arch, "architecture")
      ->required()
      ->check(CLI::IsMember({"bert_resnet", "mlp_clip", "clip_mmbt"}));
  train->add_option("--train", train_args.train, "train manifest + cache")
      ->required()
      ->expected(2);
  train->add_option("--val", train_args.val, "validation manifest + cache")
      ->required()
      ->expected(2);
  train->add_option("--out", train_args.out, "checkpoint path")->required();
  train->add_option("--log", train_args.log, "training log path");
  train->add_option("--epochs", train_args.epochs, "override preset epochs");
  train->add_option("--batch-size", train_args.batch_size, "override preset batch");
  train->add_option("--lr", train_args.learning_rate, "override preset learning rate");
  train->add_flag("--class-weights", train_args.class_weights, "balance classes");
  train->add_option("--seed", train_args.seed, "init + shuffle seed");
  train->callback([&] { cmd_train(train_args); });

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "score a split with a checkpoint");
  predict->add_option("--ckpt", predict_args.ckpt, "checkpoint path")->required();
  predict->add_option("--in", predict_args.in, "manifest + cache")->required()->expected(2);
  predict->add_option("--out", predict_args.out, "predictions path")->required();
  predict->callback([&] { cmd_predict(predict_args); });

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against truth");
  evaluate->add_option("--preds", eval_args.preds, "predictions file")->required();
  evaluate->add_option("--manifest", eval_args.manifest, "truth manifest")->required();
  evaluate->add_option("--averaging", eval_args.averaging, "metric averaging")
      ->check(CLI::IsMember({"macro", "micro", "per_class"}));
  evaluate->add_option("--set-name", eval_args.set_name, "report label");
  evaluate->add_option("--json", eval_args.json_out, "also write metrics json");
  evaluate->callback([&] { cmd_evaluate(eval_args); });

  GridArgs grid_args;
  auto* grid = app.add_subcommand("grid", "robustness grid over manipulation sets");
  grid->add_option("--models", grid_args.models, "name=checkpoint entries")
      ->required()
      ->take_all();
  grid->add_option("--sets", grid_args.sets, "name=manifest,cache entries")
      ->required()
      ->take_all();
  grid->add_option("--out", grid_args.out, "output directory")->required();
  grid->add_option("--averaging", grid_args.averaging, "metric averaging")
      ->check(CLI::IsMember({"macro", "micro", "per_class"}));
  grid->add_flag("--ensemble", grid_args.ensemble, "append a majority-vote row");
  grid->callback([&] { cmd_grid(grid_args); });

  EnsembleArgs ensemble_args;
  auto* ensemble = app.add_subcommand("ensemble", "majority-vote member checkpoints");
  ensemble->add_option("--members", ensemble_args.members, "member checkpoints")
      ->required()
      ->take_all();
  ensemble->add_option("--in", ensemble_args.in, "manifest + cache(s)")
      ->required()
      ->take_all();
  ensemble->add_option("--out", ensemble_args.out, "predictions path")->required();
  ensemble->add_option("--spec-out", ensemble_args.spec_out, "write the ensemble spec");
  ensemble->callback([&] { cmd_ensemble(ensemble_args); });

  FixturesArgs fixtures_args;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "write deterministic test corpora");
  fixtures_cmd->add_option("--spec", fixtures_args.spec, "synthetic corpus spec json");
  fixtures_cmd->add_option("--out", fixtures_args.out, "fixture output directory");
  fixtures_cmd->add_option("--mini-me", fixtures_args.mini_me,
                           "write a miniature tweet corpus tree here");
  fixtures_cmd->add_option("--mini-vn", fixtures_args.mini_vn,
                           "write a miniature caption corpus tree here");
  fixtures_cmd->callback([&] { cmd_fixtures(fixtures_args); });

  VnmeArgs vnme_args;
  auto* make_vnme = app.add_subcommand("make-vnme", "compose the three training corpora");
  make_vnme->add_option("--manifests", vnme_args.manifests, "source manifests")
      ->required()
      ->take_all();
  make_vnme->add_option("--out", vnme_args.out, "output directory")->required();
  make_vnme->callback([&] { cmd_make_vnme(vnme_args); });

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "execute a declarative pipeline config");
  run->add_option("--config", run_args.config, "run config json")->required();
  run->add_flag("--dry-run", run_args.dry_run, "print the resolved DAG only");
  run->callback([&] { cmd_run(run_args); });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
