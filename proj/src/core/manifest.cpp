#include "mmfnd/core/manifest.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/registry.hpp"

namespace mmfnd {

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      fields.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace

std::string escape_manifest_field(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_manifest_field(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    char c = escaped[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (i + 1 >= escaped.size()) {
      throw EncodingError("dangling escape at end of field");
    }
    char next = escaped[++i];
    switch (next) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default:
        throw EncodingError(std::string("unknown escape sequence '\\") + next + "'");
    }
  }
  return out;
}

void write_manifest(const DatasetSplit& split, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open manifest for writing: " + path.string());
  out << kManifestHeader << '\n';
  for (const Post& p : split.posts) {
    out << escape_manifest_field(p.id) << '\t'
        << escape_manifest_field(p.text) << '\t'
        << escape_manifest_field(p.image_ref) << '\t'
        << escape_manifest_field(p.event_id.value_or("")) << '\t'
        << to_string(p.label) << '\t'
        << to_string(p.split) << '\t'
        << to_string(p.origin) << '\t'
        << escape_manifest_field(p.derived_from.value_or("")) << '\n';
  }
  if (!out) throw Error("write to manifest failed: " + path.string());
}

DatasetSplit read_manifest(const std::filesystem::path& path) {
  return read_manifest(path, path.stem().string());
}

DatasetSplit read_manifest(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw SchemaMismatchError("manifest is empty (missing header): " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    throw SchemaMismatchError("unexpected manifest header in " + path.string() +
                              ": '" + line + "'");
  }
  std::vector<Post> posts;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 8) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": expected 8 fields, got "
          << fields.size();
      throw EncodingError(msg.str());
    }
    Post p;
    p.id = unescape_manifest_field(fields[0]);
    p.text = unescape_manifest_field(fields[1]);
    p.image_ref = unescape_manifest_field(fields[2]);
    std::string event = unescape_manifest_field(fields[3]);
    if (!event.empty()) p.event_id = std::move(event);
    p.label = label_from_string(fields[4]);
    p.split = split_from_string(fields[5]);
    p.origin = origin_from_string(fields[6]);
    std::string derived = unescape_manifest_field(fields[7]);
    if (!derived.empty()) p.derived_from = std::move(derived);
    posts.push_back(std::move(p));
  }
  return register_split(std::move(name), std::move(posts));
}

DatasetSplit filter_split(const DatasetSplit& all, Split which) {
  std::vector<Post> kept;
  for (const Post& p : all.posts) {
    if (p.split == which) kept.push_back(p);
  }
  return register_split(all.name + "." + std::string(to_string(which)), std::move(kept));
}

DatasetSplit filter_label(const DatasetSplit& all, Label which) {
  std::vector<Post> kept;
  for (const Post& p : all.posts) {
    if (p.label == which) kept.push_back(p);
  }
  return register_split(all.name + "." + std::string(to_string(which)), std::move(kept));
}

}  // namespace mmfnd
