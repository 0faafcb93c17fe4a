#include "mmfnd/fixtures/fixtures.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"
#include "mmfnd/core/manifest.hpp"
#include "mmfnd/core/registry.hpp"
#include "mmfnd/core/rng.hpp"
#include "mmfnd/manip/corpus_pass.hpp"

namespace mmfnd::fixtures {

using nlohmann::json;

namespace {

const std::vector<std::string>& event_pool() {
  static const std::vector<std::string> events = {
      "evt-aurora", "evt-bedrock", "evt-cinder", "evt-dunes",
      "evt-ember",  "evt-fjord",   "evt-grove",  "evt-harbor"};
  return events;
}

// Keys for fake posts' images. Disjoint from the corpus events, so a fake
// pair shares no anchor direction with its text (uncorrelated), while
// eval-time image swaps still inject in-corpus event anchors.
const std::vector<std::string>& decoy_pool() {
  static const std::vector<std::string> decoys = {
      "evt-mirage", "evt-obsidian", "evt-quarry", "evt-saffron",
      "evt-thicket", "evt-umbral",  "evt-vortex", "evt-willow"};
  return decoys;
}

const std::vector<std::string>& person_pool() {
  static const std::vector<std::string> v = {"Alice", "Bruno", "Chandra", "Dana"};
  return v;
}

const std::vector<std::string>& location_pool() {
  static const std::vector<std::string> v = {"Springfield", "Lakeside", "Gresham",
                                             "Avondale"};
  return v;
}

const std::vector<std::string>& org_pool() {
  static const std::vector<std::string> v = {"Metrodesk", "Civilwatch", "Harborlink",
                                             "Reliefworks"};
  return v;
}

// Tiny binary PPM whose header comment carries the planted event key the
// mock encoders look for. Pixel bytes are random so refs never collide.
std::vector<std::uint8_t> ppm_image(const std::string& tag, Rng& rng) {
  std::string head = "P6\n# tag:" + tag + "\n4 4\n255\n";
  std::vector<std::uint8_t> bytes(head.begin(), head.end());
  for (int i = 0; i < 4 * 4 * 3; ++i) {
    bytes.push_back(static_cast<std::uint8_t>(rng.uniform_index(256)));
  }
  return bytes;
}

int fake_count_for(int n, double fraction) {
  return static_cast<int>(std::llround(n * fraction));
}

DatasetSplit build_split(const SyntheticCorpusSpec& spec, const std::string& name,
                         Split tag, int n, ImageStore& store) {
  const auto& events = event_pool();
  Rng rng(derive_seed(spec.seed, "split:" + name));
  Rng img_rng(derive_seed(spec.seed, "images:" + name));

  const int n_fake = fake_count_for(n, spec.fake_fraction);
  std::vector<Label> labels(static_cast<std::size_t>(n), Label::REAL);
  std::fill_n(labels.begin(), n_fake, Label::FAKE);
  rng.shuffle(labels);

  std::vector<Post> posts;
  posts.reserve(labels.size());
  for (int i = 0; i < n; ++i) {
    // Round-robin events so every split holds at least two distinct ones:
    // the image-swap pools are then never empty for any post.
    const std::size_t k = static_cast<std::size_t>(i) % events.size();
    const std::string& event = events[k];
    const std::string& person = person_pool()[rng.uniform_index(person_pool().size())];
    const std::string& place = location_pool()[rng.uniform_index(location_pool().size())];
    const std::string& org = org_pool()[rng.uniform_index(org_pool().size())];

    std::string image_key = event;
    if (labels[static_cast<std::size_t>(i)] == Label::FAKE) {
      image_key = decoy_pool()[rng.uniform_index(decoy_pool().size())];
    }

    Post p;
    p.id = namespaced_id(Origin::SYNTHETIC, name + "-" + std::to_string(i));
    p.text = person + " reported from " + place + " as " + event +
             " unfolded, dispatch " + std::to_string(i) + " via " + org + ".";
    p.image_ref =
        store.add(ppm_image(image_key, img_rng), name + "-" + std::to_string(i) + ".ppm");
    p.event_id = event;
    p.label = labels[static_cast<std::size_t>(i)];
    p.split = tag;
    p.origin = Origin::SYNTHETIC;
    posts.push_back(std::move(p));
  }
  return register_split(name, std::move(posts));
}

void check_class_mix(const char* field, int n, double fraction) {
  if (n < 2) {
    throw SpecInvalidError(std::string(field) + " must be at least 2, got " +
                           std::to_string(n));
  }
  const int n_fake = fake_count_for(n, fraction);
  if (n_fake < 1 || n_fake > n - 1) {
    throw SpecInvalidError(std::string(field) + "=" + std::to_string(n) +
                           " with fake_fraction yields a single-class split");
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EncodingError("cannot write " + path.string());
  out << content;
}

}  // namespace

void SyntheticCorpusSpec::validate() const {
  if (!(fake_fraction > 0.0) || !(fake_fraction < 1.0)) {
    throw SpecInvalidError("fake_fraction must be in (0, 1), got " +
                           std::to_string(fake_fraction));
  }
  if (signal_strength < 0.0 || signal_strength > 1.0) {
    throw SpecInvalidError("signal_strength must be in [0, 1], got " +
                           std::to_string(signal_strength));
  }
  check_class_mix("n_train", n_train, fake_fraction);
  check_class_mix("n_val", n_val, fake_fraction);
  check_class_mix("n_test", n_test, fake_fraction);
}

json SyntheticCorpusSpec::to_json() const {
  return json{{"n_train", n_train},
              {"n_val", n_val},
              {"n_test", n_test},
              {"fake_fraction", fake_fraction},
              {"signal_strength", signal_strength},
              {"seed", seed}};
}

SyntheticCorpusSpec SyntheticCorpusSpec::from_json(const json& j) {
  SyntheticCorpusSpec spec;
  try {
    spec.n_train = j.at("n_train").get<int>();
    spec.n_val = j.at("n_val").get<int>();
    spec.n_test = j.at("n_test").get<int>();
    spec.fake_fraction = j.at("fake_fraction").get<double>();
    spec.signal_strength = j.at("signal_strength").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw SpecInvalidError(std::string("synthetic corpus spec: ") + e.what());
  }
  return spec;
}

SyntheticCorpusSpec SyntheticCorpusSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecInvalidError("cannot open spec: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SpecInvalidError("spec " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

SyntheticCorpus generate_synthetic(const SyntheticCorpusSpec& spec, ImageStore& store) {
  spec.validate();
  SyntheticCorpus corpus;

  for (const auto& event : event_pool()) {
    corpus.alias_map[event] = {event};
  }
  for (const auto& s : person_pool()) corpus.tagger_map[s] = "person";
  for (const auto& s : location_pool()) corpus.tagger_map[s] = "location";
  for (const auto& s : org_pool()) corpus.tagger_map[s] = "organization";
  corpus.entity_index["person"] = person_pool();
  corpus.entity_index["location"] = location_pool();
  corpus.entity_index["organization"] = org_pool();

  corpus.train = build_split(spec, "train", Split::TRAIN, spec.n_train, store);
  corpus.validation =
      build_split(spec, "validation", Split::VALIDATION, spec.n_val, store);
  corpus.test = build_split(spec, "test", Split::TEST, spec.n_test, store);

  // One archive image per event, tagged with that event: a legitimate
  // same-event substitute for every post.
  Rng archive_rng(derive_seed(spec.seed, "archive"));
  std::map<std::string, std::string> archive_refs;
  for (const auto& event : event_pool()) {
    archive_refs[event] =
        store.add(ppm_image(event, archive_rng), "archive-" + event + ".ppm");
  }
  for (const DatasetSplit* split : {&corpus.train, &corpus.validation, &corpus.test}) {
    for (const auto& post : split->posts) {
      corpus.curated[post.id] = manip::CuratedImage{archive_refs.at(*post.event_id),
                                                    post.event_id};
      corpus.evtrem_annotations.emplace_back(
          manip::derived_post_id(post.id, Technique::EVT_REM), post.label);
    }
  }
  return corpus;
}

FixturePaths fixture_paths(const std::filesystem::path& root) {
  FixturePaths p;
  p.root = root;
  p.train_manifest = root / "train.manifest.tsv";
  p.validation_manifest = root / "validation.manifest.tsv";
  p.test_manifest = root / "test.manifest.tsv";
  p.images_dir = root / "images";
  p.aliases = root / "aliases.json";
  p.tagger = root / "tagger.json";
  p.entities = root / "entities.json";
  p.curated = root / "curated.json";
  p.annotations = root / "annotations.tsv";
  p.fixture_file = root / "fixture.json";
  return p;
}

FixturePaths write_synthetic_fixture(const SyntheticCorpusSpec& spec,
                                     const std::filesystem::path& out_dir) {
  const FixturePaths paths = fixture_paths(out_dir);
  std::filesystem::create_directories(out_dir);
  ImageStore store(paths.images_dir, /*create_dirs=*/true);
  const SyntheticCorpus corpus = generate_synthetic(spec, store);

  write_manifest(corpus.train, paths.train_manifest);
  write_manifest(corpus.validation, paths.validation_manifest);
  write_manifest(corpus.test, paths.test_manifest);
  manip::AliasTable(corpus.alias_map).save(paths.aliases);
  write_text_file(paths.tagger, json(corpus.tagger_map).dump(2) + "\n");
  manip::save_entity_index(corpus.entity_index, paths.entities);
  manip::save_curated_map(corpus.curated, paths.curated);
  manip::write_annotation_rows(corpus.evtrem_annotations, paths.annotations);

  json fixture{{"version", 1}, {"spec", spec.to_json()}};
  write_text_file(paths.fixture_file, fixture.dump(2) + "\n");
  return paths;
}

SyntheticCorpusSpec load_fixture_spec(const std::filesystem::path& root) {
  const auto path = fixture_paths(root).fixture_file;
  std::ifstream in(path);
  if (!in) throw SpecInvalidError("cannot open fixture: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SpecInvalidError("fixture " + path.string() + ": " + e.what());
  }
  if (!j.contains("spec")) throw SpecInvalidError("fixture has no spec: " + path.string());
  return SyntheticCorpusSpec::from_json(j.at("spec"));
}

void write_mediaeval_mini(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  Rng rng(41);
  const auto put_image = [&](const std::string& stem, const std::string& tag) {
    write_file_bytes(dir / "images" / (stem + ".ppm"), ppm_image(tag, rng));
  };
  put_image("sandy1", "sandy");
  put_image("sandy2", "sandy");
  put_image("sandy3", "sandy");
  put_image("sandy4", "sandy");
  put_image("sandy5", "sandy");
  put_image("boston1", "boston");
  put_image("sochi1", "sochi");
  put_image("sochi2", "sochi");
  put_image("sochi3", "sochi");

  const std::string header = "tweet_id\ttweet_text\timage_id(s)\tevent\tlabel\n";
  // Train carries the awkward rows: a video attachment, a missing image and
  // a two-image tweet.
  write_text_file(
      dir / "train.tsv",
      header +
          "t1\tFlooding on the parkway as sandy makes landfall\tsandy1\tsandy\tfake\n"
          "t2\tSubway entrance underwater after sandy\tsandy2\tsandy\treal\n"
          "t3\tsandy aftermath, two shots from the boardwalk\tsandy3,sandy4\tsandy\treal\n"
          "t4\tCrowd near the finish line in boston\tboston1\tboston\treal\n"
          "t5\tboston suspect arrested, live footage\tclip1.mp4\tboston\tfake\n"
          "t6\tPhoto from the boston vigil\tghost\tboston\treal\n");
  write_text_file(dir / "validation.tsv",
                  header +
                      "t7\tOpening ceremony rings over sochi\tsochi1\tsochi\treal\n"
                      "t8\tsochi wolf roaming the hotel corridor\tsochi2\tsochi\thumor\n");
  write_text_file(dir / "test.tsv",
                  header +
                      "t9\tNight panorama over the sochi village\tsochi3\tsochi\tfake\n"
                      "t10\tParkway cleanup crews after sandy\tsandy5\tsandy\treal\n");
}

void write_visualnews_mini(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  Rng rng(43);
  const auto put_image = [&](const std::string& stem) {
    write_file_bytes(dir / "images" / (stem + ".ppm"), ppm_image(stem, rng));
  };
  for (const auto* stem : {"vn1", "vn2", "vn3", "vn5", "vn6", "vn7", "vn8"}) {
    put_image(stem);
  }

  const auto caption = [](const std::string& id, const std::string& text,
                          const std::string& image, const std::string& source,
                          const std::string& topic) {
    return json{{"id", id},
                {"caption", text},
                {"image_path", image},
                {"source", source},
                {"topic", topic}};
  };
  json train = json::array(
      {caption("v1", "A tugboat guides the container ship into harbor", "vn1.ppm",
               "guardian", "shipping"),
       caption("v2", "Volunteers stack sandbags along the levee", "vn2.ppm", "bbc",
               "weather"),
       caption("v3", "The mayor tours the reopened central market", "vn3.ppm",
               "washington_post", "city"),
       // Image missing on disk: ingestion must drop this one.
       caption("v4", "Dawn breaks over the quarantined terminal", "vnghost.ppm",
               "guardian", "transit")});
  write_text_file(dir / "train.json", train.dump(2) + "\n");

  // Validation ships as JSON lines to cover the second accepted layout.
  write_text_file(dir / "validation.json",
                  caption("v5", "Skaters test the refrozen canal ice", "vn5.ppm", "bbc",
                          "weather")
                          .dump() +
                      "\n" +
                      caption("v6", "A crane lifts the fallen oak off the tram line",
                              "vn6.ppm", "usa_today", "city")
                          .dump() +
                      "\n");
  json test = json::array({caption("v7", "Divers inspect the bridge pylons", "vn7.ppm",
                                   "guardian", "infrastructure"),
                           caption("v8", "The night market reopens after repairs",
                                   "vn8.ppm", "usa_today", "city")});
  write_text_file(dir / "test.json", test.dump(2) + "\n");
}

}  // namespace mmfnd::fixtures
