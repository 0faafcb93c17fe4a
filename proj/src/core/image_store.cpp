#include "mmfnd/core/image_store.hpp"

#include <fstream>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"

namespace mmfnd {

namespace fs = std::filesystem;

namespace {

std::string sanitize_filename(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out.push_back(ok ? c : '_');
  }
  if (out.empty()) out = "image";
  return out;
}

}  // namespace

ImageStore::ImageStore(fs::path root, bool create_dirs) : root_(std::move(root)) {
  if (create_dirs) fs::create_directories(root_);
}

std::string ImageStore::add(const std::vector<std::uint8_t>& bytes,
                            std::string_view filename) {
  std::string ref = sha256_hex(std::span<const std::uint8_t>(bytes)).substr(0, 16) +
                    "-" + sanitize_filename(filename);
  fs::path target = root_ / ref;
  if (!fs::exists(target)) {
    write_file_bytes(target, bytes);
  }
  return ref;
}

std::string ImageStore::add_file(const fs::path& file) {
  return add(read_file_bytes(file), file.filename().string());
}

bool ImageStore::contains(std::string_view ref) const {
  if (ref.empty() || ref.find('/') != std::string_view::npos) return false;
  return fs::exists(root_ / fs::path(ref));
}

fs::path ImageStore::resolve(std::string_view ref) const {
  fs::path p = root_ / fs::path(ref);
  if (ref.empty() || ref.find('/') != std::string_view::npos || !fs::exists(p)) {
    throw MissingImageError("image ref '" + std::string(ref) + "' not found under " +
                            root_.string());
  }
  return p;
}

std::vector<std::uint8_t> ImageStore::read(std::string_view ref) const {
  return read_file_bytes(resolve(ref));
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace mmfnd
