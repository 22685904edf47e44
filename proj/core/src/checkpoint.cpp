#include "wae/checkpoint.hpp"

#include <openssl/evp.h>

#include "binary_io.hpp"
#include "wae/errors.hpp"

namespace wae {
namespace {
constexpr std::string_view kMagic = "WAENET1";
constexpr std::uint32_t kMaxRank = 8;
}  // namespace

const nn::Tensor<float>& Checkpoint::get(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw FormatError("checkpoint has no tensor named \"" + name + "\"");
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  detail::ByteWriter w;
  w.magic(kMagic);
  w.str(ckpt.descriptor);
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.tensor.rank()));
    for (int d : t.tensor.shape()) w.u32(static_cast<std::uint32_t>(d));
  }
  for (const auto& t : ckpt.tensors) w.f32s(t.tensor.values());
  w.crc();
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  r.verify_crc();
  r.expect_magic(kMagic);
  Checkpoint ckpt;
  ckpt.descriptor = r.str();
  const std::uint32_t count = r.u32();
  std::vector<std::pair<std::string, std::vector<int>>> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank > kMaxRank) throw FormatError("checkpoint: tensor \"" + name + "\" has rank " + std::to_string(rank));
    std::vector<int> shape(rank);
    for (auto& d : shape) {
      const std::uint32_t v = r.u32();
      if (v > (1u << 28)) throw FormatError("checkpoint: implausible dimension in \"" + name + "\"");
      d = static_cast<int>(v);
    }
    table.emplace_back(std::move(name), std::move(shape));
  }
  for (auto& [name, shape] : table) {
    nn::Tensor<float> t(shape);
    if (t.size() * 4 > r.remaining()) throw FormatError("checkpoint truncated in tensor \"" + name + "\"");
    r.f32s(t.values());
    ckpt.tensors.push_back({std::move(name), std::move(t)});
  }
  if (r.remaining() != 0) throw FormatError("checkpoint has trailing bytes");
  return ckpt;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  detail::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::string& path) { return decode_checkpoint(detail::read_file(path)); }

Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest d{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size()) {
    throw Error("SHA-256 computation failed");
  }
  return d;
}

std::string to_hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : d) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 15]);
  }
  return s;
}

Digest digest_from_hex(const std::string& hex) {
  if (hex.size() != 64) throw FieldError("digest must be 64 hex characters");
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw FieldError("digest contains non-hex character");
  };
  Digest d{};
  for (std::size_t i = 0; i < 32; ++i) {
    d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) * 16 + nibble(hex[2 * i + 1]));
  }
  return d;
}

}  // namespace wae
