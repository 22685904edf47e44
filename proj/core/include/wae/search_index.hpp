#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wae/checkpoint.hpp"
#include "wae/ui_model.hpp"

namespace wae {

class WaeModel;

inline constexpr int kDefaultK = 10;

struct SearchHit {
  std::string id;
  double distance = 0.0;  // squared L2
  int rank = 0;           // 1-based
  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

using SearchResult = std::vector<SearchHit>;

/// Exact latent index. Entries keep insertion order; vectors are stored
/// contiguously.
class LatentIndex {
 public:
  LatentIndex() = default;
  LatentIndex(int dim, const Digest& checksum) : dim_(dim), checksum_(checksum) {}

  int dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const Digest& checksum() const { return checksum_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> vector(std::size_t i) const;
  /// Position of `id`, or size() when absent.
  std::size_t find(const std::string& id) const;

  /// Throws FieldError for a duplicate id, ShapeError for a wrong dimension.
  void add(const std::string& id, std::span<const float> vec);

  /// Top min(k, size) by squared L2, ties by id. Throws ShapeError.
  SearchResult knn(std::span<const float> query, int k = kDefaultK) const;
  /// Every entry, ranked.
  SearchResult rank_all(std::span<const float> query) const;

  /// Throws FormatError when `expected` differs from the stored checksum.
  void verify(const Digest& expected) const;

  friend bool operator==(const LatentIndex& a, const LatentIndex& b) {
    return a.dim_ == b.dim_ && a.checksum_ == b.checksum_ && a.ids_ == b.ids_ && a.data_ == b.data_;
  }

 private:
  int dim_ = 0;
  Digest checksum_{};
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> position_;
};

/// One entry per screen, encode(render(screen)) in corpus order.
LatentIndex build_index(const WaeModel& model, const std::vector<UIScreen>& corpus);

/// "WAEIDX1", u32 dim, u32 count, 32-byte model checksum, per entry
/// (u32 id length, id bytes, dim f32), trailing CRC32.
std::vector<std::uint8_t> encode_index(const LatentIndex& index);
LatentIndex decode_index(std::span<const std::uint8_t> bytes);
void save_index(const LatentIndex& index, const std::string& path);
LatentIndex load_index(const std::string& path);
/// Also verifies the stored checksum against `expected`.
LatentIndex load_index(const std::string& path, const Digest& expected);

}  // namespace wae
