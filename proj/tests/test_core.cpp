#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"
#include "mmfnd/core/image_store.hpp"
#include "mmfnd/core/manifest.hpp"
#include "mmfnd/core/registry.hpp"
#include "mmfnd/core/rng.hpp"
#include "mmfnd/core/types.hpp"

using namespace mmfnd;
namespace fs = std::filesystem;

namespace {

Post make_post(std::string id, Label label, std::string text = "some text") {
  Post p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.image_ref = "0123456789abcdef-img.ppm";
  p.label = label;
  p.split = Split::TRAIN;
  p.origin = Origin::SYNTHETIC;
  return p;
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("mmfnd_core_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("register_split counts labels") {
  auto s = register_split("s", {make_post("a", Label::FAKE), make_post("b", Label::FAKE),
                                make_post("c", Label::REAL)});
  CHECK(s.fake_count == 2);
  CHECK(s.real_count == 1);
  CHECK(s.size() == 3);
}

TEST_CASE("register_split at ME2015 test scale") {
  // Table-1-sized split: 717 fake / 1,215 real.
  std::vector<Post> posts;
  for (int i = 0; i < 717; ++i) posts.push_back(make_post("f" + std::to_string(i), Label::FAKE));
  for (int i = 0; i < 1215; ++i) posts.push_back(make_post("r" + std::to_string(i), Label::REAL));
  auto s = register_split("me2015-test", std::move(posts));
  CHECK(s.fake_count == 717);
  CHECK(s.real_count == 1215);
  CHECK(s.size() == 1932);
}

TEST_CASE("register_split rejects duplicate ids") {
  CHECK_THROWS_AS(register_split("s", {make_post("p1", Label::FAKE), make_post("p1", Label::REAL)}),
                  DuplicateIdError);
}

TEST_CASE("register_split is idempotent on identical input") {
  std::vector<Post> posts = {make_post("a", Label::FAKE), make_post("b", Label::REAL)};
  auto s1 = register_split("s", posts);
  auto s2 = register_split("s", posts);
  CHECK(s1.posts == s2.posts);
  CHECK(s1.fake_count == s2.fake_count);
  CHECK(s1.real_count == s2.real_count);
}

TEST_CASE("merge_splits sums counts and preserves order") {
  auto a = register_split("a", {make_post("a1", Label::FAKE), make_post("a2", Label::FAKE),
                                make_post("a3", Label::REAL)});
  auto b = register_split("b", {make_post("b1", Label::REAL), make_post("b2", Label::REAL),
                                make_post("b3", Label::REAL), make_post("b4", Label::REAL)});
  std::vector<DatasetSplit> parts = {a, b};
  auto m = merge_splits(parts, "m");
  CHECK(m.fake_count == 2);
  CHECK(m.real_count == 5);
  CHECK(m.posts.front().id == "a1");
  CHECK(m.posts.back().id == "b4");
}

TEST_CASE("merge_splits at VN train scale") {
  // Table-3-sized merge: 258,488 real originals + 258,487 FakeIm fakes.
  std::vector<Post> reals, fakes;
  reals.reserve(258488);
  fakes.reserve(258487);
  for (int i = 0; i < 258488; ++i) reals.push_back(make_post("vn/r" + std::to_string(i), Label::REAL, "t"));
  for (int i = 0; i < 258487; ++i) fakes.push_back(make_post("vn/f" + std::to_string(i), Label::FAKE, "t"));
  std::vector<DatasetSplit> parts = {register_split("vn-train", std::move(reals)),
                                     register_split("vn-train-fakeim", std::move(fakes))};
  auto m = merge_splits(parts, "vnme-img.vn");
  CHECK(m.fake_count == 258487);
  CHECK(m.real_count == 258488);
}

TEST_CASE("merge_splits rejects a split merged with itself") {
  auto a = register_split("a", {make_post("a1", Label::FAKE)});
  std::vector<DatasetSplit> parts = {a, a};
  CHECK_THROWS_AS(merge_splits(parts, "m"), DuplicateIdError);
}

TEST_CASE("merge_splits is associative in counts") {
  Rng rng(99);
  auto random_split = [&](const std::string& prefix) {
    std::vector<Post> posts;
    std::size_t n = 1 + rng.uniform_index(20);
    for (std::size_t i = 0; i < n; ++i) {
      posts.push_back(make_post(prefix + std::to_string(i),
                                rng.uniform() < 0.5 ? Label::FAKE : Label::REAL));
    }
    return register_split(prefix, std::move(posts));
  };
  for (int trial = 0; trial < 25; ++trial) {
    auto a = random_split("a" + std::to_string(trial) + "_");
    auto b = random_split("b" + std::to_string(trial) + "_");
    auto c = random_split("c" + std::to_string(trial) + "_");
    std::vector<DatasetSplit> ab = {a, b};
    std::vector<DatasetSplit> left_parts = {merge_splits(ab, "ab"), c};
    std::vector<DatasetSplit> bc = {b, c};
    std::vector<DatasetSplit> right_parts = {a, merge_splits(bc, "bc")};
    auto left = merge_splits(left_parts, "l");
    auto right = merge_splits(right_parts, "r");
    CHECK(left.fake_count == right.fake_count);
    CHECK(left.real_count == right.real_count);
    CHECK(left.fake_count + left.real_count == left.posts.size());
  }
}

TEST_CASE("manifest round-trips exactly, including hostile text") {
  auto dir = temp_dir("manifest");
  std::vector<Post> posts;
  Post p = make_post("synthetic/p1", Label::REAL, "tab\there\nand newline, emoji \xF0\x9F\x94\xA5");
  p.event_id = "evt-alpha";
  p.derived_from = "evtrep:synthetic/p0";
  posts.push_back(p);
  posts.push_back(make_post("synthetic/p2", Label::FAKE, "back\\slash and \r carriage"));
  posts.push_back(make_post("synthetic/p3", Label::REAL, ""));
  auto split = register_split("rt", std::move(posts));

  fs::path path = dir / "m.tsv";
  write_manifest(split, path);
  auto back = read_manifest(path, "rt");
  CHECK(back.posts == split.posts);
  CHECK(back.fake_count == split.fake_count);
  CHECK(back.real_count == split.real_count);

  // byte-identical re-serialization
  fs::path path2 = dir / "m2.tsv";
  write_manifest(back, path2);
  CHECK(read_file_bytes(path) == read_file_bytes(path2));
}

TEST_CASE("manifest round-trip property over random unicode") {
  auto dir = temp_dir("manifest_prop");
  Rng rng(1234);
  const std::vector<std::string> alphabet = {
      "a", "Z", "0", " ", "\t", "\n", "\r", "\\", "é", "ß", "中", "🚒", "𝛼", "\"", "'", ":"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Post> posts;
    std::size_t n = 1 + rng.uniform_index(8);
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      std::size_t len = rng.uniform_index(24);
      for (std::size_t k = 0; k < len; ++k) text += alphabet[rng.uniform_index(alphabet.size())];
      Post p = make_post("p" + std::to_string(i), rng.uniform() < 0.5 ? Label::FAKE : Label::REAL,
                         text.empty() ? "x" : text);
      if (rng.uniform() < 0.5) p.event_id = "evt-" + std::to_string(rng.uniform_index(5));
      posts.push_back(std::move(p));
    }
    auto split = register_split("prop", std::move(posts));
    fs::path path = dir / ("t" + std::to_string(trial) + ".tsv");
    write_manifest(split, path);
    auto back = read_manifest(path, "prop");
    REQUIRE(back.posts == split.posts);
  }
}

TEST_CASE("manifest with missing header is a schema mismatch") {
  auto dir = temp_dir("manifest_hdr");
  fs::path path = dir / "bad.tsv";
  std::ofstream(path) << "id\ttext\n";
  CHECK_THROWS_AS(read_manifest(path), SchemaMismatchError);
}

TEST_CASE("manifest rejects malformed rows") {
  auto dir = temp_dir("manifest_row");
  fs::path path = dir / "bad.tsv";
  std::ofstream(path) << kManifestHeader << "\n" << "only\tthree\tfields\n";
  CHECK_THROWS_AS(read_manifest(path), EncodingError);
}

TEST_CASE("field escaping handles every escapable byte") {
  std::string raw = "a\tb\nc\rd\\e";
  CHECK(unescape_manifest_field(escape_manifest_field(raw)) == raw);
  CHECK_THROWS_AS(unescape_manifest_field("bad\\q"), EncodingError);
  CHECK_THROWS_AS(unescape_manifest_field("dangling\\"), EncodingError);
}

TEST_CASE("image store round-trips and content-addresses") {
  auto dir = temp_dir("store");
  ImageStore store(dir / "imgs", /*create_dirs=*/true);
  std::vector<std::uint8_t> bytes = {'P', '3', ' ', '1', ' ', '1', '\n', '0'};
  std::string ref = store.add(bytes, "tiny.ppm");
  CHECK(store.contains(ref));
  CHECK(store.read(ref) == bytes);
  // same bytes, same name -> same ref, no duplicate file
  CHECK(store.add(bytes, "tiny.ppm") == ref);
  CHECK_THROWS_AS(store.resolve("deadbeefdeadbeef-gone.ppm"), MissingImageError);
  CHECK_FALSE(store.contains("../escape"));
}

TEST_CASE("seed derivation is stable and key-sensitive") {
  auto s1 = derive_seed(7, "stage-a");
  auto s2 = derive_seed(7, "stage-a");
  auto s3 = derive_seed(7, "stage-b");
  auto s4 = derive_seed(8, "stage-a");
  CHECK(s1 == s2);
  CHECK(s1 != s3);
  CHECK(s1 != s4);
}

TEST_CASE("sha256 matches a known vector") {
  CHECK(sha256_hex(std::string_view("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("rng uniform_index stays in range and shuffle is a permutation") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.uniform_index(7) < 7);
  }
  std::vector<int> v = {1, 2, 3, 4, 5, 6, 7, 8};
  auto sorted = v;
  rng.shuffle(v);
  CHECK(v != sorted);  // 8! permutations; identity is vanishingly unlikely
  std::sort(v.begin(), v.end());
  CHECK(v == sorted);
}

TEST_CASE("namespaced ids carry the origin prefix") {
  CHECK(namespaced_id(Origin::ME2015, "42") == "me2015/42");
  CHECK(namespaced_id(Origin::VN, "a/b") == "vn/a/b");
}
