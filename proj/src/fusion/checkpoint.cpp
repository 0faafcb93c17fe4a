#include "mmfnd/fusion/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"
#include "mmfnd/core/hash.hpp"

namespace mmfnd::fusion {

namespace {

constexpr char kMagic[] = "MMFNDCKP";
constexpr std::size_t kMagicLen = 8;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& bytes, std::size_t& at) {
  if (at + 4 > bytes.size()) throw SchemaMismatchError("checkpoint truncated in length field");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  at += 4;
  return v;
}

}  // namespace

Checkpoint Checkpoint::capture(FusionModel& model, const std::string& text_encoder,
                               const std::string& image_encoder, std::uint64_t seed, int epoch,
                               double val_loss) {
  Checkpoint ckpt;
  ckpt.model_config = model.config();
  ckpt.text_encoder = text_encoder;
  ckpt.image_encoder = image_encoder;
  ckpt.seed = seed;
  ckpt.epoch = epoch;
  ckpt.val_loss = val_loss;
  for (const Tensor* t : model.parameters()) ckpt.tensors.emplace_back(t->name, t->value);
  return ckpt;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& [name, value] : ckpt.tensors)
    manifest.push_back({{"name", name}, {"rows", value.rows()}, {"cols", value.cols()}});
  nlohmann::json header{{"version", 1},
                        {"model", ckpt.model_config.to_json()},
                        {"text_encoder", ckpt.text_encoder},
                        {"image_encoder", ckpt.image_encoder},
                        {"seed", ckpt.seed},
                        {"epoch", ckpt.epoch},
                        {"val_loss", ckpt.val_loss},
                        {"tensors", manifest}};
  std::string hdr = header.dump();

  std::string out(kMagic, kMagicLen);
  put_u32(out, static_cast<std::uint32_t>(hdr.size()));
  out += hdr;
  for (const auto& [name, value] : ckpt.tensors) {
    for (Eigen::Index c = 0; c < value.cols(); ++c)
      for (Eigen::Index r = 0; r < value.rows(); ++r) {
        double d = value(r, c);
        std::uint64_t bits = 0;
        std::memcpy(&bits, &d, sizeof bits);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
      }
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagicLen || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0)
    throw SchemaMismatchError("not a checkpoint file (bad magic)");
  std::size_t at = kMagicLen;
  std::uint32_t hdr_len = get_u32(bytes, at);
  if (at + hdr_len > bytes.size()) throw SchemaMismatchError("checkpoint truncated in header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(at, hdr_len));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatchError(std::string("checkpoint header is not JSON: ") + e.what());
  }
  at += hdr_len;

  Checkpoint ckpt;
  try {
    if (header.at("version").get<int>() != 1)
      throw SchemaMismatchError("unsupported checkpoint version");
    ckpt.model_config = FusionModelConfig::from_json(header.at("model"));
    ckpt.text_encoder = header.at("text_encoder").get<std::string>();
    ckpt.image_encoder = header.at("image_encoder").get<std::string>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.val_loss = header.at("val_loss").get<double>();
    for (const auto& entry : header.at("tensors")) {
      auto name = entry.at("name").get<std::string>();
      auto rows = entry.at("rows").get<Eigen::Index>();
      auto cols = entry.at("cols").get<Eigen::Index>();
      Eigen::MatrixXd value(rows, cols);
      std::size_t need = static_cast<std::size_t>(rows * cols) * 8;
      if (at + need > bytes.size())
        throw SchemaMismatchError("checkpoint truncated in tensor " + name);
      for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) {
          std::uint64_t bits = 0;
          for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + i]))
                    << (8 * i);
          at += 8;
          double d = 0;
          std::memcpy(&d, &bits, sizeof d);
          value(r, c) = d;
        }
      ckpt.tensors.emplace_back(std::move(name), std::move(value));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatchError(std::string("bad checkpoint header: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw EncodingError("cannot open checkpoint for writing: " + path);
  std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw EncodingError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingCacheError("no checkpoint at " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

std::string checkpoint_hash(const Checkpoint& ckpt) {
  return sha256_hex(serialize_checkpoint(ckpt));
}

std::unique_ptr<FusionModel> model_from_checkpoint(const Checkpoint& ckpt) {
  auto model = make_model(ckpt.model_config, ckpt.seed);
  auto params = model->parameters();
  if (params.size() != ckpt.tensors.size())
    throw SchemaMismatchError("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                              " tensors, architecture expects " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, value] = ckpt.tensors[i];
    if (params[i]->name != name)
      throw SchemaMismatchError("checkpoint tensor " + name + " does not match parameter " +
                                params[i]->name);
    if (params[i]->value.rows() != value.rows() || params[i]->value.cols() != value.cols())
      throw DimMismatchError("checkpoint tensor " + name + " has the wrong shape");
    params[i]->value = value;
  }
  return model;
}

}  // namespace mmfnd::fusion
