#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wae/tensor.hpp"

namespace wae {

struct NamedTensor {
  std::string name;
  nn::Tensor<float> tensor;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Parameter file: magic "WAENET1", u32-length JSON architecture descriptor,
/// u32 tensor count, per tensor (name, rank, dims), then the little-endian
/// f32 payload of every tensor in table order, then CRC32 of all prior bytes.
struct Checkpoint {
  std::string descriptor;  // JSON
  std::vector<NamedTensor> tensors;

  const nn::Tensor<float>& get(const std::string& name) const;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on bad magic, truncation or CRC mismatch.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
std::string to_hex(const Digest& d);
Digest digest_from_hex(const std::string& hex);

}  // namespace wae
