#include "mmfnd/core/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mmfnd/core/errors.hpp"

namespace mmfnd {

namespace {

std::array<std::uint8_t, 32> sha256_raw(const void* data, std::size_t len) {
  std::array<std::uint8_t, 32> digest{};
  unsigned int out_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data, len) != 1 ||
      EVP_DigestFinal_ex(ctx, digest.data(), &out_len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  return digest;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  auto digest = sha256_raw(bytes.data(), bytes.size());
  return to_hex(digest);
}

std::string sha256_hex(std::string_view text) {
  auto digest = sha256_raw(text.data(), text.size());
  return to_hex(digest);
}

std::string sha256_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for hashing: " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 init failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    std::streamsize got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(got)) != 1) {
      EVP_MD_CTX_free(ctx);
      throw Error("sha256 update failed");
    }
  }
  std::array<std::uint8_t, 32> digest{};
  unsigned int out_len = 0;
  if (EVP_DigestFinal_ex(ctx, digest.data(), &out_len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 final failed");
  }
  EVP_MD_CTX_free(ctx);
  return to_hex(digest);
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key) {
  std::string material;
  material.reserve(16 + 1 + key.size());
  for (int i = 0; i < 8; ++i) {
    material.push_back(static_cast<char>((global_seed >> (8 * i)) & 0xff));
  }
  material.push_back('\0');
  material.append(key);
  auto digest = sha256_raw(material.data(), material.size());
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) {
    seed |= static_cast<std::uint64_t>(digest[static_cast<std::size_t>(i)]) << (8 * i);
  }
  return seed;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace mmfnd
