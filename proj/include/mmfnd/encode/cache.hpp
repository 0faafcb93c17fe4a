#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mmfnd/encode/encoder.hpp"

namespace mmfnd::encode {

// Binary container: magic, JSON header (encoder names, dims, count), then
// one record per pair: u32 id length, id bytes, float32 text vector, float32
// image vector, all little-endian. Round-trips bitwise.
void cache_embeddings(std::span<const EmbeddingPair> pairs, const std::filesystem::path& path);

// Loads every record. When expected encoder names are given, a header
// mismatch (names or dims) throws CacheKeyMismatchError instead of serving
// stale vectors.
std::vector<EmbeddingPair> load_embeddings(const std::filesystem::path& path,
                                           const std::string& expected_text_encoder = {},
                                           const std::string& expected_image_encoder = {});

// Returns cached pairs when the cache covers exactly the split's post ids
// under the requested encoders; otherwise encodes (dropping undecodable
// posts) and rewrites the cache. A full hit leaves both call counters
// untouched.
std::vector<EmbeddingPair> encode_or_load(const DatasetSplit& split, const ImageStore& images,
                                          Encoder& text_encoder, Encoder& image_encoder,
                                          const std::filesystem::path& cache_path);

}  // namespace mmfnd::encode
