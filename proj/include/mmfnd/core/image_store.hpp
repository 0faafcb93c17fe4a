#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mmfnd {

// Content-addressed image directory. A ref is "<sha256[:16]>-<filename>";
// identical bytes map to one file, so manipulated posts can share image
// bytes by re-pointing references.
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path root, bool create_dirs = false);

  // Hashes the bytes, stores them under the derived ref (no-op if already
  // present) and returns the ref.
  std::string add(const std::vector<std::uint8_t>& bytes, std::string_view filename);
  std::string add_file(const std::filesystem::path& file);

  bool contains(std::string_view ref) const;
  // Throws MissingImageError for unknown refs.
  std::filesystem::path resolve(std::string_view ref) const;
  std::vector<std::uint8_t> read(std::string_view ref) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes);

}  // namespace mmfnd
