#include "binary_io.hpp"

#include <algorithm>
#include <zlib.h>

#include <fstream>
#include <iterator>

namespace wae::detail {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; chunk for very large payloads.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    c = ::crc32(c, bytes.data() + pos, n);
    pos += n;
  }
  return static_cast<std::uint32_t>(c);
}

void ByteWriter::crc() { u32(crc32(buf_)); }

void ByteReader::expect_magic(std::string_view m) {
  auto got = take(m.size());
  if (std::memcmp(got.data(), m.data(), m.size()) != 0) {
    throw FormatError(what_ + ": bad magic, expected \"" + std::string(m) + "\"");
  }
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (remaining() < n) throw FormatError(what_ + ": truncated");
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint32_t ByteReader::u32() {
  std::uint32_t v;
  std::memcpy(&v, take(4).data(), 4);
  return v;
}

float ByteReader::f32() {
  float v;
  std::memcpy(&v, take(4).data(), 4);
  return v;
}

void ByteReader::f32s(std::span<float> out) {
  auto src = take(out.size() * 4);
  std::memcpy(out.data(), src.data(), src.size());
}

std::string ByteReader::str() {
  const auto n = u32();
  auto s = take(n);
  return std::string(s.begin(), s.end());
}

void ByteReader::verify_crc() {
  if (bytes_.size() < 4) throw FormatError(what_ + ": truncated");
  const auto body = bytes_.first(bytes_.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, bytes_.data() + body.size(), 4);
  if (stored != crc32(body)) throw FormatError(what_ + ": CRC mismatch (corrupt or truncated)");
  bytes_ = body;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path);
}

}  // namespace wae::detail
