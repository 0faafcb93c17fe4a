#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mmfnd/fixtures/fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/image_store.hpp"
#include "mmfnd/core/manifest.hpp"
#include "mmfnd/encode/cache.hpp"
#include "mmfnd/encode/mock_encoder.hpp"
#include "mmfnd/eval/metrics.hpp"
#include "mmfnd/fusion/config.hpp"
#include "mmfnd/fusion/dataset.hpp"
#include "mmfnd/fusion/model.hpp"
#include "mmfnd/fusion/trainer.hpp"
#include "mmfnd/ingest/adapters.hpp"
#include "mmfnd/manip/corpus_pass.hpp"

using namespace mmfnd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("mmfnd_fixtures_" + tag);
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

fixtures::SyntheticCorpusSpec desk_spec() {
  fixtures::SyntheticCorpusSpec spec;
  spec.n_train = 40;
  spec.n_val = 10;
  spec.n_test = 10;
  spec.fake_fraction = 0.5;
  spec.signal_strength = 0.9;
  spec.seed = 7;
  return spec;
}

std::vector<const DatasetSplit*> all_splits(const fixtures::SyntheticCorpus& c) {
  return {&c.train, &c.validation, &c.test};
}

// Encodes a generated split with planted-pair mocks at the spec's signal
// strength, the way the pipeline's encode stage does.
fusion::EncodedDataset encode_split(const DatasetSplit& split, const ImageStore& store,
                                    const fixtures::SyntheticCorpusSpec& spec,
                                    const fs::path& cache_dir, int dim) {
  encode::MockOptions mock{spec.seed, true, spec.signal_strength};
  auto text_enc =
      encode::make_encoder(encode::EncoderSpec::mock(encode::Modality::TEXT, dim), mock);
  auto image_enc =
      encode::make_encoder(encode::EncoderSpec::mock(encode::Modality::IMAGE, dim), mock);
  auto pairs = encode::encode_or_load(split, store, *text_enc, *image_enc,
                                      cache_dir / (split.name + ".emb"));
  return fusion::EncodedDataset::from_split(split, pairs);
}

double test_accuracy_at_signal(double signal, std::uint64_t seed) {
  auto dir = temp_dir("signal_" + std::to_string(signal) + "_" + std::to_string(seed));
  fixtures::SyntheticCorpusSpec spec;
  spec.n_train = 96;
  spec.n_val = 24;
  spec.n_test = 100;
  spec.fake_fraction = 0.5;
  spec.signal_strength = signal;
  spec.seed = seed;

  ImageStore store(dir / "images", true);
  auto corpus = fixtures::generate_synthetic(spec, store);
  const int dim = 24;
  auto train_ds = encode_split(corpus.train, store, spec, dir, dim);
  auto val_ds = encode_split(corpus.validation, store, spec, dir, dim);
  auto test_ds = encode_split(corpus.test, store, spec, dir, dim);

  auto cfg = fusion::FusionModelConfig::preset(fusion::Architecture::MLP_CLIP, dim, dim);
  auto model = fusion::make_model(cfg, 5);
  auto tcfg = fusion::TrainingConfig::preset(fusion::Architecture::MLP_CLIP, 5);
  tcfg.epochs = 12;
  tcfg.batch_size = 16;
  fusion::train(*model, train_ds, val_ds, tcfg);

  auto preds = fusion::predict_split(*model, test_ds);
  auto report = eval::compute_metrics(preds, eval::labeled_ids(corpus.test));
  return report.accuracy;
}

}  // namespace

TEST_CASE("spec validation rejects degenerate corpora") {
  CHECK_NOTHROW(desk_spec().validate());

  auto spec = desk_spec();
  spec.n_train = 1;
  CHECK_THROWS_AS(spec.validate(), SpecInvalidError);

  spec = desk_spec();
  spec.n_val = 0;
  CHECK_THROWS_AS(spec.validate(), SpecInvalidError);

  spec = desk_spec();
  spec.fake_fraction = 0.0;
  CHECK_THROWS_AS(spec.validate(), SpecInvalidError);
  spec.fake_fraction = 1.0;
  CHECK_THROWS_AS(spec.validate(), SpecInvalidError);

  // 4 posts at 5% fake rounds to zero fakes: single-class split.
  spec = desk_spec();
  spec.n_train = 4;
  spec.fake_fraction = 0.05;
  CHECK_THROWS_AS(spec.validate(), SpecInvalidError);

  spec = desk_spec();
  spec.signal_strength = 1.5;
  CHECK_THROWS_AS(spec.validate(), SpecInvalidError);
  spec.signal_strength = -0.1;
  CHECK_THROWS_AS(spec.validate(), SpecInvalidError);
}

TEST_CASE("spec json round-trips and bad files throw") {
  auto spec = desk_spec();
  auto back = fixtures::SyntheticCorpusSpec::from_json(spec.to_json());
  CHECK(back == spec);

  auto dir = temp_dir("spec_json");
  {
    std::ofstream out(dir / "spec.json");
    out << spec.to_json().dump(2);
  }
  CHECK(fixtures::SyntheticCorpusSpec::load(dir / "spec.json") == spec);

  CHECK_THROWS_AS(fixtures::SyntheticCorpusSpec::load(dir / "absent.json"),
                  SpecInvalidError);
  {
    std::ofstream out(dir / "broken.json");
    out << "{\"n_train\": 40";
  }
  CHECK_THROWS_AS(fixtures::SyntheticCorpusSpec::load(dir / "broken.json"),
                  SpecInvalidError);
  CHECK_THROWS_AS(fixtures::SyntheticCorpusSpec::from_json(nlohmann::json{{"n_train", 4}}),
                  SpecInvalidError);
}

TEST_CASE("generation is deterministic in the seed") {
  auto dir_a = temp_dir("gen_a");
  auto dir_b = temp_dir("gen_b");
  ImageStore store_a(dir_a, true);
  ImageStore store_b(dir_b, true);

  auto a = fixtures::generate_synthetic(desk_spec(), store_a);
  auto b = fixtures::generate_synthetic(desk_spec(), store_b);

  CHECK(a.train.posts == b.train.posts);
  CHECK(a.validation.posts == b.validation.posts);
  CHECK(a.test.posts == b.test.posts);
  CHECK(a.alias_map == b.alias_map);
  CHECK(a.tagger_map == b.tagger_map);
  CHECK(a.entity_index == b.entity_index);
  CHECK(a.evtrem_annotations == b.evtrem_annotations);
  REQUIRE(a.curated.size() == b.curated.size());
  for (const auto& [id, img] : a.curated) {
    REQUIRE(b.curated.count(id) == 1);
    CHECK(b.curated.at(id).image_ref == img.image_ref);
    CHECK(b.curated.at(id).event_id == img.event_id);
  }

  // A different seed must actually change the corpus.
  auto spec2 = desk_spec();
  spec2.seed = 8;
  auto dir_c = temp_dir("gen_c");
  ImageStore store_c(dir_c, true);
  auto c = fixtures::generate_synthetic(spec2, store_c);
  CHECK(c.train.posts != a.train.posts);
}

TEST_CASE("written fixture trees are byte-identical across runs") {
  auto dir_a = temp_dir("tree_a");
  auto dir_b = temp_dir("tree_b");
  auto paths_a = fixtures::write_synthetic_fixture(desk_spec(), dir_a);
  auto paths_b = fixtures::write_synthetic_fixture(desk_spec(), dir_b);

  CHECK(slurp(paths_a.train_manifest) == slurp(paths_b.train_manifest));
  CHECK(slurp(paths_a.validation_manifest) == slurp(paths_b.validation_manifest));
  CHECK(slurp(paths_a.test_manifest) == slurp(paths_b.test_manifest));
  CHECK(slurp(paths_a.aliases) == slurp(paths_b.aliases));
  CHECK(slurp(paths_a.tagger) == slurp(paths_b.tagger));
  CHECK(slurp(paths_a.entities) == slurp(paths_b.entities));
  CHECK(slurp(paths_a.curated) == slurp(paths_b.curated));
  CHECK(slurp(paths_a.annotations) == slurp(paths_b.annotations));
  CHECK(slurp(paths_a.fixture_file) == slurp(paths_b.fixture_file));

  CHECK(fixtures::load_fixture_spec(dir_a) == desk_spec());

  // The manifests load back into the same splits the generator produced.
  ImageStore fresh(temp_dir("tree_fresh"), true);
  auto corpus = fixtures::generate_synthetic(desk_spec(), fresh);
  auto train = read_manifest(paths_a.train_manifest, "train");
  CHECK(train.posts == corpus.train.posts);
}

TEST_CASE("fake_fraction is honored exactly") {
  auto dir = temp_dir("counts");
  ImageStore store(dir, true);
  auto corpus = fixtures::generate_synthetic(desk_spec(), store);
  CHECK(corpus.train.fake_count == 20);
  CHECK(corpus.train.real_count == 20);
  CHECK(corpus.validation.fake_count == 5);
  CHECK(corpus.validation.real_count == 5);
  CHECK(corpus.test.fake_count == 5);
  CHECK(corpus.test.real_count == 5);

  auto spec = desk_spec();
  spec.fake_fraction = 0.25;
  ImageStore store2(temp_dir("counts2"), true);
  auto skewed = fixtures::generate_synthetic(spec, store2);
  CHECK(skewed.train.fake_count == 10);
  CHECK(skewed.train.real_count == 30);
}

TEST_CASE("every generated post survives ingestion-grade checks") {
  auto dir = temp_dir("clean");
  ImageStore store(dir / "images", true);
  auto corpus = fixtures::generate_synthetic(desk_spec(), store);
  manip::AliasTable aliases(corpus.alias_map);

  std::set<std::string> ids;
  for (const auto* split : all_splits(corpus)) {
    for (const auto& post : split->posts) {
      CHECK(ids.insert(post.id).second);
      CHECK(post.id.rfind("synthetic/", 0) == 0);
      CHECK(post.origin == Origin::SYNTHETIC);
      CHECK_FALSE(post.text.empty());

      // Image must exist in the store and decode as a PPM bitmap.
      REQUIRE(store.contains(post.image_ref));
      auto format = encode::sniff_image_format(store.read(post.image_ref));
      REQUIRE(format.has_value());
      CHECK(*format == "ppm");

      // The event id appears verbatim, so event-level manipulations and the
      // planted-pair encoders both find their anchor.
      REQUIRE(post.event_id.has_value());
      CHECK(post.text.find(*post.event_id) != std::string::npos);
      CHECK(aliases.find_occurrences(post.text, *post.event_id).size() >= 1);
    }
  }

  // Curated archive entry for every post, same event by construction.
  std::size_t total = corpus.train.size() + corpus.validation.size() + corpus.test.size();
  CHECK(corpus.curated.size() == total);
  CHECK(corpus.evtrem_annotations.size() == total);
  for (const auto* split : all_splits(corpus)) {
    for (const auto& post : split->posts) {
      REQUIRE(corpus.curated.count(post.id) == 1);
      const auto& cur = corpus.curated.at(post.id);
      CHECK(cur.event_id == post.event_id);
      CHECK(store.contains(cur.image_ref));
      CHECK(cur.image_ref != post.image_ref);
    }
  }
}

TEST_CASE("real posts pair matching planted keys, fakes never do") {
  auto dir = temp_dir("keys");
  ImageStore store(dir, true);
  auto corpus = fixtures::generate_synthetic(desk_spec(), store);
  for (const auto* split : all_splits(corpus)) {
    for (const auto& post : split->posts) {
      auto bytes = store.read(post.image_ref);
      std::string head(bytes.begin(), bytes.begin() + 40);
      auto tag_at = head.find("# tag:");
      REQUIRE(tag_at != std::string::npos);
      auto end = head.find('\n', tag_at);
      std::string image_key = head.substr(tag_at + 6, end - tag_at - 6);
      if (post.label == Label::REAL) {
        CHECK(image_key == *post.event_id);
      } else {
        // Fake images carry a decoy key no corpus text ever mentions.
        CHECK(image_key != *post.event_id);
        CHECK(corpus.alias_map.count(image_key) == 0);
        CHECK(image_key.rfind("evt-", 0) == 0);
      }
    }
  }
}

TEST_CASE("all five manipulation techniques run on the generated corpus") {
  auto dir = temp_dir("manip");
  ImageStore store(dir, true);
  auto corpus = fixtures::generate_synthetic(desk_spec(), store);

  manip::AliasTable aliases(corpus.alias_map);
  manip::RuleTagger tagger(corpus.tagger_map);
  manip::PassOptions options;
  options.seed = 11;
  options.aliases = &aliases;
  options.curated = &corpus.curated;
  options.tagger = &tagger;
  options.entity_index = &corpus.entity_index;

  const auto& input = corpus.test;

  auto evtrep = manip::apply_technique(input, Technique::EVT_REP, options);
  CHECK(evtrep.split.size() == input.size());
  CHECK(evtrep.skipped.empty());
  CHECK(evtrep.split.fake_count == input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto& derived = evtrep.split.posts[i];
    const auto& source = input.posts[i];
    CHECK(derived.text.find(*source.event_id) == std::string::npos);
    CHECK(*derived.event_id != *source.event_id);
    CHECK(derived.text.find(*derived.event_id) != std::string::npos);
  }

  auto evtrem = manip::apply_technique(input, Technique::EVT_REM, options);
  CHECK(evtrem.split.size() == input.size());
  CHECK(evtrem.skipped.empty());
  CHECK(evtrem.pending.size() == input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    CHECK(evtrem.split.posts[i].text.find(*input.posts[i].event_id) ==
          std::string::npos);
    CHECK_FALSE(evtrem.split.posts[i].text.empty());
  }
  // The generated annotation rows cover exactly the pending derivatives.
  std::vector<std::pair<std::string, Label>> rows;
  for (const auto& row : corpus.evtrem_annotations) {
    if (evtrem.pending.pending(row.first)) rows.push_back(row);
  }
  CHECK(rows.size() == input.size());
  CHECK(evtrem.pending.import_annotations(rows, evtrem.split, &evtrem.records) ==
        input.size());
  CHECK(evtrem.pending.empty());
  CHECK(evtrem.split.fake_count == input.fake_count);
  CHECK(evtrem.split.real_count == input.real_count);

  auto fakeim = manip::apply_technique(input, Technique::FAKE_IM, options);
  CHECK(fakeim.split.size() == input.size());
  CHECK(fakeim.skipped.empty());
  CHECK(fakeim.split.fake_count == input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    CHECK(fakeim.split.posts[i].image_ref != input.posts[i].image_ref);
    CHECK(fakeim.split.posts[i].text == input.posts[i].text);
  }

  auto realim = manip::apply_technique(input, Technique::REAL_IM, options);
  CHECK(realim.split.size() == input.size());
  CHECK(realim.skipped.empty());
  // The curated same-event image makes every pair consistent: all REAL.
  CHECK(realim.split.fake_count == 0);
  CHECK(realim.split.real_count == input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    CHECK(realim.split.posts[i].image_ref ==
          corpus.curated.at(input.posts[i].id).image_ref);
  }

  auto entrep = manip::apply_technique(input, Technique::ENTITY_REP, options);
  CHECK(entrep.split.size() == input.size());
  CHECK(entrep.skipped.empty());
  CHECK(entrep.split.fake_count == input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    CHECK(entrep.split.posts[i].text != input.posts[i].text);
    // Event mentions survive entity replacement untouched.
    CHECK(entrep.split.posts[i].text.find(*input.posts[i].event_id) !=
          std::string::npos);
  }
}

TEST_CASE("saved sidecars load back through the production loaders") {
  auto dir = temp_dir("sidecars");
  auto paths = fixtures::write_synthetic_fixture(desk_spec(), dir);

  ImageStore fresh(temp_dir("sidecars_gen"), true);
  auto corpus = fixtures::generate_synthetic(desk_spec(), fresh);

  auto aliases = manip::AliasTable::load(paths.aliases);
  CHECK(aliases.size() == corpus.alias_map.size());
  CHECK(aliases.canonical_surface("evt-aurora") == "evt-aurora");

  auto tagger = manip::RuleTagger::load(paths.tagger);
  auto spans = tagger.tag(corpus.train.posts.front().text);
  CHECK(spans.size() == 3);  // person, location, organization

  CHECK(manip::load_entity_index(paths.entities) == corpus.entity_index);
  auto curated = manip::load_curated_map(paths.curated);
  CHECK(curated.size() == corpus.curated.size());
  auto rows = manip::read_annotation_rows(paths.annotations);
  CHECK(rows == corpus.evtrem_annotations);

  // The manifest images resolve against the written store directory.
  ImageStore written(paths.images_dir);
  auto train = read_manifest(paths.train_manifest, "train");
  for (const auto& post : train.posts) CHECK(written.contains(post.image_ref));
}

TEST_CASE("zero signal strength trains to chance-level accuracy") {
  // Embeddings carry no cross-modal agreement, so test accuracy must sit
  // inside a generous binomial band around 0.5 (n=100).
  double acc = test_accuracy_at_signal(0.0, 3);
  CHECK(acc >= 0.35);
  CHECK(acc <= 0.65);
}

TEST_CASE("strong signal strength is learnable from the fixture alone") {
  double acc = test_accuracy_at_signal(0.9, 3);
  CHECK(acc >= 0.9);
}

TEST_CASE("mediaeval mini tree ingests with the documented drops") {
  auto dir = temp_dir("me_mini");
  fixtures::write_mediaeval_mini(dir);

  ImageStore store(dir / "store", true);
  ingest::IngestOptions opts;
  opts.origin = Origin::ME2015;
  auto split = ingest::ingest_mediaeval_corpus(dir, ingest::ColumnMap{}, store, opts);

  // 10 tweets; the video tweet and the missing image drop out, the
  // two-image tweet doubles: 9 posts.
  CHECK(split.size() == 9);
  CHECK(split.fake_count == 3);  // t1, t9 fake + t8 humor-as-fake
  CHECK(split.real_count == 6);

  std::set<std::string> ids;
  for (const auto& post : split.posts) ids.insert(post.id);
  CHECK(ids.count("me2015/t3#0") == 1);
  CHECK(ids.count("me2015/t3#1") == 1);
  CHECK(ids.count("me2015/t5#0") == 0);  // video
  CHECK(ids.count("me2015/t6#0") == 0);  // image gone

  for (const auto& post : split.posts) {
    CHECK(store.contains(post.image_ref));
    CHECK(encode::sniff_image_format(store.read(post.image_ref)) == "ppm");
    REQUIRE(post.event_id.has_value());
    if (post.id == "me2015/t7#0") CHECK(post.split == Split::VALIDATION);
    if (post.id == "me2015/t9#0") {
      CHECK(post.split == Split::TEST);
      CHECK(post.label == Label::FAKE);
    }
    if (post.id == "me2015/t8#0") CHECK(post.label == Label::FAKE);
  }

  // Writer output is byte-stable.
  auto dir2 = temp_dir("me_mini2");
  fixtures::write_mediaeval_mini(dir2);
  CHECK(slurp(dir / "train.tsv") == slurp(dir2 / "train.tsv"));
  CHECK(slurp(dir / "images" / "sandy1.ppm") == slurp(dir2 / "images" / "sandy1.ppm"));
}

TEST_CASE("visualnews mini tree ingests both json layouts") {
  auto dir = temp_dir("vn_mini");
  fixtures::write_visualnews_mini(dir);

  ImageStore store(dir / "store", true);
  ingest::IngestOptions opts;
  opts.origin = Origin::VN;
  auto split = ingest::ingest_visualnews_corpus(dir, ingest::ColumnMap{}, store, opts);

  // 8 captions, one image missing on disk: 7 posts, all real.
  CHECK(split.size() == 7);
  CHECK(split.fake_count == 0);
  CHECK(split.real_count == 7);

  std::set<std::string> ids;
  for (const auto& post : split.posts) {
    ids.insert(post.id);
    CHECK(post.label == Label::REAL);
    CHECK_FALSE(post.event_id.has_value());
    CHECK(store.contains(post.image_ref));
  }
  CHECK(ids.count("vn/v4") == 0);  // missing image
  CHECK(ids.count("vn/v5") == 1);  // json-lines layout parsed
  CHECK(ids.count("vn/v6") == 1);

  for (const auto& post : split.posts) {
    if (post.id == "vn/v5") CHECK(post.split == Split::VALIDATION);
    if (post.id == "vn/v7") CHECK(post.split == Split::TEST);
  }
}
