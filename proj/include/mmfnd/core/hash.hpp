#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmfnd {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file_hex(const std::string& path);

// First 8 bytes of SHA-256(domain || '\0' || key), little-endian. Used to fan a
// global seed out into independent per-stage / per-post streams.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key);

// FNV-1a, used for stable token hashing.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace mmfnd
