#include "mmfnd/encode/cache.hpp"

#include <cstring>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"

namespace mmfnd::encode {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'M', 'F', 'N', 'D', 'E', 'M', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_floats(std::ostream& out, const std::vector<float>& v) {
  static_assert(sizeof(float) == 4);
  for (float x : v) {
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    put_u32(out, bits);
  }
}

std::vector<float> get_floats(std::istream& in, std::uint32_t n) {
  std::vector<float> v(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t bits = get_u32(in);
    std::memcpy(&v[i], &bits, 4);
  }
  return v;
}

}  // namespace

void cache_embeddings(std::span<const EmbeddingPair> pairs,
                      const std::filesystem::path& path) {
  json header;
  header["version"] = kVersion;
  header["count"] = pairs.size();
  if (!pairs.empty()) {
    header["text_encoder"] = pairs.front().text_encoder;
    header["image_encoder"] = pairs.front().image_encoder;
    header["text_dim"] = pairs.front().text_vec.size();
    header["image_dim"] = pairs.front().image_vec.size();
  } else {
    header["text_encoder"] = "";
    header["image_encoder"] = "";
    header["text_dim"] = 0;
    header["image_dim"] = 0;
  }
  for (const EmbeddingPair& p : pairs) {
    if (p.text_encoder != header["text_encoder"].get<std::string>() ||
        p.image_encoder != header["image_encoder"].get<std::string>() ||
        p.text_vec.size() != header["text_dim"].get<std::size_t>() ||
        p.image_vec.size() != header["image_dim"].get<std::size_t>()) {
      throw CacheKeyMismatchError("pair '" + p.post_id +
                                  "' disagrees with the cache header");
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write embedding cache: " + path.string());
  out.write(kMagic, sizeof kMagic);
  const std::string head = header.dump();
  put_u32(out, static_cast<std::uint32_t>(head.size()));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const EmbeddingPair& p : pairs) {
    put_u32(out, static_cast<std::uint32_t>(p.post_id.size()));
    out.write(p.post_id.data(), static_cast<std::streamsize>(p.post_id.size()));
    put_floats(out, p.text_vec);
    put_floats(out, p.image_vec);
  }
  if (!out) throw Error("short write to embedding cache: " + path.string());
}

std::vector<EmbeddingPair> load_embeddings(const std::filesystem::path& path,
                                           const std::string& expected_text_encoder,
                                           const std::string& expected_image_encoder) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingCacheError("no embedding cache at " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw SchemaMismatchError("not an embedding cache: " + path.string());
  }
  const std::uint32_t head_len = get_u32(in);
  std::string head(head_len, '\0');
  in.read(head.data(), head_len);
  json header;
  try {
    header = json::parse(head);
  } catch (const json::exception& e) {
    throw SchemaMismatchError("embedding cache header: " + std::string(e.what()));
  }
  if (header.at("version").get<std::uint32_t>() != kVersion) {
    throw SchemaMismatchError("embedding cache version mismatch");
  }
  const auto text_encoder = header.at("text_encoder").get<std::string>();
  const auto image_encoder = header.at("image_encoder").get<std::string>();
  if (!expected_text_encoder.empty() && text_encoder != expected_text_encoder) {
    throw CacheKeyMismatchError("cache was built with text encoder '" + text_encoder +
                                "', expected '" + expected_text_encoder + "'");
  }
  if (!expected_image_encoder.empty() && image_encoder != expected_image_encoder) {
    throw CacheKeyMismatchError("cache was built with image encoder '" + image_encoder +
                                "', expected '" + expected_image_encoder + "'");
  }
  const auto count = header.at("count").get<std::size_t>();
  const auto text_dim = header.at("text_dim").get<std::uint32_t>();
  const auto image_dim = header.at("image_dim").get<std::uint32_t>();

  std::vector<EmbeddingPair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    EmbeddingPair p;
    const std::uint32_t id_len = get_u32(in);
    p.post_id.resize(id_len);
    in.read(p.post_id.data(), id_len);
    p.text_vec = get_floats(in, text_dim);
    p.image_vec = get_floats(in, image_dim);
    p.text_encoder = text_encoder;
    p.image_encoder = image_encoder;
    if (!in) {
      throw SchemaMismatchError("embedding cache truncated at record " + std::to_string(i));
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<EmbeddingPair> encode_or_load(const DatasetSplit& split, const ImageStore& images,
                                          Encoder& text_encoder, Encoder& image_encoder,
                                          const std::filesystem::path& cache_path) {
  if (std::filesystem::exists(cache_path)) {
    try {
      auto cached = load_embeddings(cache_path, text_encoder.spec().name,
                                    image_encoder.spec().name);
      std::set<std::string> cached_ids;
      for (const EmbeddingPair& p : cached) cached_ids.insert(p.post_id);
      std::set<std::string> wanted;
      for (const Post& p : split.posts) wanted.insert(p.id);
      // Exact id coverage or rebuild; a split with posts the encoder once
      // dropped re-encodes rather than trusting a partial cache.
      if (cached_ids == wanted) return cached;
    } catch (const CacheKeyMismatchError&) {
      throw;  // stale key is an error, not a rebuild trigger
    } catch (const Error&) {
      // damaged cache: fall through to re-encode
    }
  }
  auto pairs = encode_batch(split, images, text_encoder, image_encoder);
  cache_embeddings(pairs, cache_path);
  return pairs;
}

}  // namespace mmfnd::encode
