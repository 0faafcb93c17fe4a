#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/manifest.hpp"
#include "mmfnd/core/registry.hpp"
#include "mmfnd/eval/predictions_io.hpp"
#include "mmfnd/fixtures/fixtures.hpp"
#include "mmfnd/fusion/trainer.hpp"
#include "mmfnd/pipeline/runner.hpp"
#include "mmfnd/pipeline/stages.hpp"
#include "mmfnd/pipeline/vnme.hpp"

using namespace mmfnd;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("mmfnd_pipeline_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

Post mini_post(const std::string& id, Label label, const std::string& derived_from) {
  Post p;
  p.id = id;
  p.text = "text for " + id;
  p.image_ref = "ref-" + id;
  p.label = label;
  p.origin = Origin::SYNTHETIC;
  if (!derived_from.empty()) p.derived_from = derived_from;
  return p;
}

// Spec-sized miniature: 10 caption originals, 6 tweet originals, plus one
// derived block per technique.
std::vector<DatasetSplit> vnme_sources() {
  std::vector<Post> vn;
  for (int i = 0; i < 10; ++i) {
    vn.push_back(mini_post("vn/c" + std::to_string(i), Label::REAL, ""));
  }
  for (int i = 0; i < 4; ++i) {
    vn.push_back(mini_post("vn/c" + std::to_string(i) + "!entrep", Label::FAKE,
                           "entrep:vn/c" + std::to_string(i)));
  }
  for (int i = 0; i < 5; ++i) {
    vn.push_back(mini_post("vn/c" + std::to_string(i) + "!fakeim", Label::FAKE,
                           "fakeim:vn/c" + std::to_string(i)));
  }
  std::vector<Post> me;
  for (int i = 0; i < 6; ++i) {
    me.push_back(mini_post("me2015/t" + std::to_string(i) + "#0",
                           i < 2 ? Label::FAKE : Label::REAL, ""));
  }
  for (int i = 0; i < 3; ++i) {
    me.push_back(mini_post("me2015/t" + std::to_string(i) + "#0!evtrep", Label::FAKE,
                           "evtrep:me2015/t" + std::to_string(i) + "#0"));
  }
  for (int i = 0; i < 2; ++i) {
    me.push_back(mini_post("me2015/t" + std::to_string(i) + "#0!fakeim", Label::FAKE,
                           "fakeim:me2015/t" + std::to_string(i) + "#0"));
  }
  // Evaluation-only derivatives must never enter a training composition.
  me.push_back(mini_post("me2015/t2#0!realim", Label::REAL, "realim:me2015/t2#0"));
  me.push_back(mini_post("me2015/t3#0!evtrem", Label::FAKE, "evtrem:me2015/t3#0"));
  return {register_split("vn", std::move(vn)), register_split("me", std::move(me))};
}

json fixture_stage(int n_train, int n_val, int n_test, double signal, int seed) {
  return json{{"name", "fixture"},
              {"kind", "fixture"},
              {"params",
               {{"spec",
                 {{"n_train", n_train},
                  {"n_val", n_val},
                  {"n_test", n_test},
                  {"fake_fraction", 0.5},
                  {"signal_strength", signal},
                  {"seed", seed}}}}}};
}

json encode_stage(const std::string& name, const std::string& manifest_ref,
                  double signal) {
  return json{{"name", name},
              {"kind", "encode"},
              {"params",
               {{"text_encoder", "mock-text-16"},
                {"image_encoder", "mock-image-16"},
                {"signal_strength", signal}}},
              {"inputs",
               {{"manifest", manifest_ref}, {"images_dir", "fixture:images_dir"}}}};
}

// fixture -> encode x3 -> train -> predict -> evaluate
json smoke_config(const std::string& workspace, double signal = 0.9) {
  json stages = json::array();
  stages.push_back(fixture_stage(48, 12, 12, signal, 7));
  stages.push_back(encode_stage("encode-train", "fixture:train_manifest", signal));
  stages.push_back(encode_stage("encode-val", "fixture:validation_manifest", signal));
  stages.push_back(encode_stage("encode-test", "fixture:test_manifest", signal));
  stages.push_back(json{{"name", "train-mlp"},
                        {"kind", "train"},
                        {"params", {{"arch", "mlp_clip"}, {"epochs", 6}, {"batch_size", 16}}},
                        {"inputs",
                         {{"train_manifest", "fixture:train_manifest"},
                          {"val_manifest", "fixture:validation_manifest"},
                          {"train_embeddings", "encode-train:embeddings"},
                          {"val_embeddings", "encode-val:embeddings"}}}});
  stages.push_back(json{{"name", "predict-test"},
                        {"kind", "predict"},
                        {"inputs",
                         {{"checkpoint", "train-mlp:checkpoint"},
                          {"manifest", "fixture:test_manifest"},
                          {"embeddings", "encode-test:embeddings"}}}});
  stages.push_back(json{{"name", "eval-test"},
                        {"kind", "evaluate"},
                        {"params", {{"averaging", "macro"}}},
                        {"inputs",
                         {{"predictions", "predict-test:predictions"},
                          {"manifest", "fixture:test_manifest"}}}});
  return json{{"workspace", workspace}, {"seed", 11}, {"stages", stages}};
}

pipeline::RunConfig config_from(const json& j, const fs::path& dir) {
  spit(dir / "config.json", j.dump(2));
  return pipeline::RunConfig::load(dir / "config.json");
}

}  // namespace

TEST_CASE("vnme composition follows the check-mark matrix") {
  const auto sources = vnme_sources();
  // Originals: 10 VN + 6 ME = 16. Derived: 4 entrep, 5+2 fakeim, 3 evtrep.
  auto img = pipeline::compose_vnme(sources, pipeline::VnmeVariant::IMG, "img");
  auto evt = pipeline::compose_vnme(sources, pipeline::VnmeVariant::EVT, "evt");
  auto all = pipeline::compose_vnme(sources, pipeline::VnmeVariant::ALL, "all");

  CHECK(img.size() == 16 + 7);
  CHECK(evt.size() == 16 + 4 + 3);
  CHECK(all.size() == 16 + 7 + 4 + 3);

  const auto has_technique = [](const DatasetSplit& split, const std::string& slug) {
    for (const auto& p : split.posts) {
      if (p.derived_from && p.derived_from->rfind(slug + ":", 0) == 0) return true;
    }
    return false;
  };
  CHECK_FALSE(has_technique(img, "evtrep"));
  CHECK_FALSE(has_technique(img, "entrep"));
  CHECK(has_technique(img, "fakeim"));
  CHECK(has_technique(evt, "evtrep"));
  CHECK(has_technique(evt, "entrep"));
  CHECK_FALSE(has_technique(evt, "fakeim"));
  // Evaluation-only rows stay out of every composition.
  for (const auto* split : {&img, &evt, &all}) {
    CHECK_FALSE(has_technique(*split, "realim"));
    CHECK_FALSE(has_technique(*split, "evtrem"));
  }

  // Order: VN originals first, exactly as they appear in the sources.
  CHECK(img.posts.front().id == "vn/c0");
  CHECK(evt.posts.front().id == "vn/c0");
}

TEST_CASE("vnme without the required derived rows refuses") {
  std::vector<Post> originals_only;
  for (int i = 0; i < 4; ++i) {
    originals_only.push_back(mini_post("vn/c" + std::to_string(i), Label::REAL, ""));
  }
  std::vector<DatasetSplit> sources{register_split("vn", std::move(originals_only))};
  CHECK_THROWS_AS(pipeline::compose_vnme(sources, pipeline::VnmeVariant::IMG, "img"),
                  MissingDerivedSplitError);
  CHECK_THROWS_AS(pipeline::compose_vnme(sources, pipeline::VnmeVariant::EVT, "evt"),
                  MissingDerivedSplitError);
  CHECK_THROWS_AS(pipeline::compose_vnme(sources, pipeline::VnmeVariant::ALL, "all"),
                  MissingDerivedSplitError);
}

TEST_CASE("make_vnme writes three manifests from files") {
  auto dir = temp_dir("make_vnme");
  const auto sources = vnme_sources();
  write_manifest(sources[0], dir / "vn.manifest.tsv");
  write_manifest(sources[1], dir / "me.manifest.tsv");

  std::vector<fs::path> manifests{dir / "vn.manifest.tsv", dir / "me.manifest.tsv"};
  auto paths = pipeline::make_vnme(manifests, dir / "out");
  CHECK(read_manifest(paths.img).size() == 23);
  CHECK(read_manifest(paths.evt).size() == 23);
  CHECK(read_manifest(paths.all).size() == 30);
}

TEST_CASE("pipeline smoke run produces every artifact") {
  auto dir = temp_dir("smoke");
  auto config = config_from(smoke_config("ws"), dir);

  auto result = pipeline::run(config);
  REQUIRE(result.stages.size() == 7);
  for (const auto& stage : result.stages) CHECK_FALSE(stage.cached);

  CHECK(fs::exists(result.artifact("fixture:train_manifest")));
  CHECK(fs::exists(result.artifact("encode-test:embeddings")));
  CHECK(fs::exists(result.artifact("train-mlp:checkpoint")));
  CHECK(fs::exists(result.artifact("train-mlp:training_log")));
  CHECK(fs::exists(result.artifact("predict-test:predictions")));
  CHECK(fs::exists(result.artifact("eval-test:report")));
  CHECK(fs::exists(result.manifest_path));

  // Human-readable aliases point into the content-addressed store.
  CHECK(fs::is_symlink(config.workspace / "train-mlp"));
  CHECK(fs::exists(config.workspace / "train-mlp" / "checkpoint.bin"));

  // Predictions cover the full test split in manifest order.
  auto preds = eval::read_predictions(
      result.artifact("predict-test:predictions").string());
  auto test_split = read_manifest(result.artifact("fixture:test_manifest"), "test");
  REQUIRE(preds.size() == test_split.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(preds[i].post_id == test_split.posts[i].id);
  }

  // The training log is the one unhashed artifact in the manifest.
  json manifest = json::parse(slurp(result.manifest_path));
  for (const auto& stage : manifest.at("stages")) {
    for (const auto& [name, out] : stage.at("outputs").items()) {
      if (stage.at("name") == "train-mlp" && name == "training_log") {
        CHECK(out.at("sha256").is_null());
      } else {
        CHECK(out.at("sha256").is_string());
      }
    }
  }
}

TEST_CASE("rerunning an unchanged config hits the cache everywhere") {
  auto dir = temp_dir("cache_hit");
  auto config = config_from(smoke_config("ws"), dir);

  auto first = pipeline::run(config);
  const std::string manifest_before = slurp(first.manifest_path);
  auto second = pipeline::run(config);

  REQUIRE(second.stages.size() == first.stages.size());
  for (const auto& stage : second.stages) CHECK(stage.cached);
  for (std::size_t i = 0; i < first.stages.size(); ++i) {
    CHECK(second.stages[i].key == first.stages[i].key);
  }
  // The rerun rewrites an identical manifest: cached-ness is not recorded.
  CHECK(slurp(second.manifest_path) == manifest_before);
}

TEST_CASE("two fresh workspaces produce identical manifests and artifacts") {
  auto dir_a = temp_dir("fresh_a");
  auto dir_b = temp_dir("fresh_b");
  auto result_a = pipeline::run(config_from(smoke_config("ws"), dir_a));
  auto result_b = pipeline::run(config_from(smoke_config("ws"), dir_b));

  CHECK(slurp(result_a.manifest_path) == slurp(result_b.manifest_path));
  CHECK(slurp(result_a.artifact("train-mlp:checkpoint")) ==
        slurp(result_b.artifact("train-mlp:checkpoint")));
  CHECK(slurp(result_a.artifact("predict-test:predictions")) ==
        slurp(result_b.artifact("predict-test:predictions")));
  CHECK(slurp(result_a.artifact("eval-test:report")) ==
        slurp(result_b.artifact("eval-test:report")));
}

TEST_CASE("changing an upstream parameter invalidates downstream stages") {
  auto dir = temp_dir("invalidate");
  auto config_a = config_from(smoke_config("ws", 0.9), dir);
  auto first = pipeline::run(config_a);

  // Same workspace, perturbed fixture signal: manifests differ from the
  // fixture on, so every stage must re-run under a new key.
  auto dir2 = temp_dir("invalidate_cfg");
  auto config_b = config_from(smoke_config("ws", 0.8), dir2);
  config_b.workspace = config_a.workspace;
  auto second = pipeline::run(config_b);

  REQUIRE(second.stages.size() == first.stages.size());
  for (std::size_t i = 0; i < first.stages.size(); ++i) {
    CHECK(second.stages[i].key != first.stages[i].key);
    CHECK_FALSE(second.stages[i].cached);
  }
}

TEST_CASE("an unchanged sibling branch stays cached while the edit reruns") {
  auto dir = temp_dir("partial");
  auto base = smoke_config("ws");
  auto config = config_from(base, dir);
  pipeline::run(config);

  // Deepen only the training stage: longer schedule, same encodes.
  base["stages"][4]["params"]["epochs"] = 8;
  auto dir2 = temp_dir("partial_cfg");
  auto config2 = config_from(base, dir2);
  config2.workspace = config.workspace;
  auto second = pipeline::run(config2);

  CHECK(second.stage("fixture").cached);
  CHECK(second.stage("encode-train").cached);
  CHECK(second.stage("encode-val").cached);
  CHECK(second.stage("encode-test").cached);
  CHECK_FALSE(second.stage("train-mlp").cached);
  CHECK_FALSE(second.stage("predict-test").cached);
  CHECK_FALSE(second.stage("eval-test").cached);
}

TEST_CASE("config validation names the offending piece") {
  auto dir = temp_dir("validation");

  // Reference to a later stage.
  json bad = smoke_config("ws");
  bad["stages"][1]["inputs"]["manifest"] = "train-mlp:checkpoint";
  CHECK_THROWS_AS(pipeline::run(config_from(bad, dir)), ConfigInvalidError);

  // Unknown output key.
  bad = smoke_config("ws");
  bad["stages"][1]["inputs"]["manifest"] = "fixture:nonexistent";
  CHECK_THROWS_AS(pipeline::run(config_from(bad, dir)), ConfigInvalidError);

  // Missing external file, error names the path.
  bad = smoke_config("ws");
  bad["stages"][1]["inputs"]["manifest"] = "no/such/manifest.tsv";
  try {
    pipeline::run(config_from(bad, dir));
    FAIL("expected ConfigInvalidError");
  } catch (const ConfigInvalidError& e) {
    CHECK(std::string(e.what()).find("no/such/manifest.tsv") != std::string::npos);
  }

  // Duplicate stage names.
  bad = smoke_config("ws");
  bad["stages"][2]["name"] = "encode-train";
  CHECK_THROWS_AS(config_from(bad, dir), ConfigInvalidError);

  // Unknown kind.
  bad = smoke_config("ws");
  bad["stages"][0]["kind"] = "mystery";
  CHECK_THROWS_AS(config_from(bad, dir), ConfigInvalidError);

  // Empty stage list.
  bad = json{{"workspace", "ws"}, {"seed", 1}, {"stages", json::array()}};
  CHECK_THROWS_AS(config_from(bad, dir), ConfigInvalidError);
}

TEST_CASE("stage failures carry the stage name and cause") {
  auto dir = temp_dir("failure");
  json config = smoke_config("ws");
  // Ask for an architecture the embeddings cannot satisfy mid-pipeline:
  // an even ensemble is the simplest deterministic stage failure, so use a
  // 2-member ensemble over the same predictions instead.
  config["stages"].push_back(json{
      {"name", "vote"},
      {"kind", "ensemble"},
      {"inputs",
       {{"predictions",
         json::array({"predict-test:predictions", "predict-test:predictions"})}}}});
  try {
    pipeline::run(config_from(config, dir));
    FAIL("expected StageFailedError");
  } catch (const StageFailedError& e) {
    const std::string what = e.what();
    CHECK(what.find("vote") != std::string::npos);
    CHECK(what.find("EvenMemberCountError") != std::string::npos);
  }
}

TEST_CASE("dry run prints the resolved dag without executing") {
  auto dir = temp_dir("dry");
  auto config = config_from(smoke_config("ws"), dir);
  const auto text = pipeline::dry_run_text(config);

  CHECK(text.find("fixture (kind fixture") != std::string::npos);
  CHECK(text.find("train-mlp (kind train") != std::string::npos);
  CHECK(text.find("encode-test:embeddings") != std::string::npos);
  // Nothing ran: the workspace stays empty.
  CHECK_FALSE(fs::exists(config.workspace / "run.json"));
  CHECK_FALSE(fs::exists(config.workspace / ".cas"));

  json bad = smoke_config("ws");
  bad["stages"][1]["inputs"]["manifest"] = "train-mlp:checkpoint";
  auto dir2 = temp_dir("dry_bad");
  CHECK_THROWS_AS(pipeline::dry_run_text(config_from(bad, dir2)), ConfigInvalidError);
}

TEST_CASE("MMFND_WORKSPACE overrides the configured workspace") {
  auto dir = temp_dir("env_ws");
  auto override_dir = temp_dir("env_ws_override");
  setenv("MMFND_WORKSPACE", override_dir.string().c_str(), 1);
  auto config = config_from(smoke_config("ignored"), dir);
  unsetenv("MMFND_WORKSPACE");
  CHECK(config.workspace == override_dir);
}

TEST_CASE("manipulate and vnme stages compose inside a run") {
  auto dir = temp_dir("manip_run");
  json stages = json::array();
  stages.push_back(fixture_stage(24, 6, 6, 0.9, 13));
  const auto manip = [](const std::string& name, const std::string& technique) {
    return json{{"name", name},
                {"kind", "manipulate"},
                {"params", {{"technique", technique}}},
                {"inputs",
                 {{"manifest", "fixture:train_manifest"},
                  {"aliases", "fixture:aliases"},
                  {"tagger", "fixture:tagger"},
                  {"entities", "fixture:entities"},
                  {"curated", "fixture:curated"},
                  {"annotations", "fixture:annotations"}}}};
  };
  stages.push_back(manip("man-evtrep", "evtrep"));
  stages.push_back(manip("man-fakeim", "fakeim"));
  stages.push_back(manip("man-evtrem", "evtrem"));
  stages.push_back(json{
      {"name", "compose"},
      {"kind", "vnme"},
      {"inputs",
       {{"sources", json::array({"fixture:train_manifest", "man-evtrep:manifest",
                                 "man-fakeim:manifest"})}}}});
  auto config =
      config_from(json{{"workspace", "ws"}, {"seed", 3}, {"stages", stages}}, dir);
  auto result = pipeline::run(config);

  auto img = read_manifest(result.artifact("compose:img"));
  auto evt = read_manifest(result.artifact("compose:evt"));
  auto all = read_manifest(result.artifact("compose:all"));
  CHECK(img.size() == 24 + 24);
  CHECK(evt.size() == 24 + 24);
  CHECK(all.size() == 24 + 24 + 24);

  // The evtrem stage imported the fixture's annotation rows: no pending ids.
  CHECK(slurp(result.artifact("man-evtrem:pending")).empty());
  auto evtrem = read_manifest(result.artifact("man-evtrem:manifest"));
  auto train = read_manifest(result.artifact("fixture:train_manifest"));
  CHECK(evtrem.fake_count == train.fake_count);
  CHECK(evtrem.real_count == train.real_count);
}
