#include "wae/search_index.hpp"

#include <algorithm>
#include <numeric>

#include "binary_io.hpp"
#include "wae/autoencoder.hpp"
#include "wae/errors.hpp"

namespace wae {
namespace {

constexpr std::string_view kMagic = "WAEIDX1";

bool hit_less(const SearchHit& a, const SearchHit& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.id < b.id;
}

}  // namespace

std::span<const float> LatentIndex::vector(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
}

std::size_t LatentIndex::find(const std::string& id) const {
  auto it = position_.find(id);
  return it == position_.end() ? ids_.size() : it->second;
}

void LatentIndex::add(const std::string& id, std::span<const float> vec) {
  if (vec.size() != static_cast<std::size_t>(dim_)) {
    throw ShapeError("vector for \"" + id + "\" has dimension " + std::to_string(vec.size()) + ", index has " +
                     std::to_string(dim_));
  }
  if (find(id) != ids_.size()) throw FieldError("duplicate screen id \"" + id + "\" in index");
  position_.emplace(id, ids_.size());
  ids_.push_back(id);
  data_.insert(data_.end(), vec.begin(), vec.end());
}

SearchResult LatentIndex::rank_all(std::span<const float> query) const {
  return knn(query, static_cast<int>(std::min<std::size_t>(ids_.size(), static_cast<std::size_t>(INT32_MAX))));
}

SearchResult LatentIndex::knn(std::span<const float> query, int k) const {
  if (query.size() != static_cast<std::size_t>(dim_)) {
    throw ShapeError("query has dimension " + std::to_string(query.size()) + ", index has " + std::to_string(dim_));
  }
  if (k < 0) throw PreconditionError("k must be non-negative");
  std::vector<SearchHit> hits(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const float* v = data_.data() + i * static_cast<std::size_t>(dim_);
    double d = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double diff = static_cast<double>(v[j]) - static_cast<double>(query[j]);
      d += diff * diff;
    }
    hits[i] = {ids_[i], d, 0};
  }
  const std::size_t take = std::min(hits.size(), static_cast<std::size_t>(k));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(), hit_less);
  hits.resize(take);
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i) + 1;
  return hits;
}

void LatentIndex::verify(const Digest& expected) const {
  if (expected != checksum_) {
    throw FormatError("index fingerprint " + to_hex(checksum_) + " does not match model " + to_hex(expected));
  }
}

LatentIndex build_index(const WaeModel& model, const std::vector<UIScreen>& corpus) {
  LatentIndex index(model.latent_dim(), model.fingerprint());
  for (const auto& screen : corpus) {
    if (index.find(screen.id) != index.size()) throw FieldError("duplicate screen id \"" + screen.id + "\" in corpus");
    index.add(screen.id, model.encode(screen));
  }
  return index;
}

std::vector<std::uint8_t> encode_index(const LatentIndex& index) {
  detail::ByteWriter w;
  w.magic(kMagic);
  w.u32(static_cast<std::uint32_t>(index.dim()));
  w.u32(static_cast<std::uint32_t>(index.size()));
  w.raw(index.checksum().data(), index.checksum().size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    w.str(index.ids()[i]);
    w.f32s(index.vector(i));
  }
  w.crc();
  return std::move(w.bytes());
}

LatentIndex decode_index(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "index");
  r.verify_crc();
  r.expect_magic(kMagic);
  const std::uint32_t dim = r.u32();
  const std::uint32_t count = r.u32();
  if (dim > (1u << 24)) throw FormatError("index: implausible dimension " + std::to_string(dim));
  Digest checksum{};
  auto raw = r.take(checksum.size());
  std::copy(raw.begin(), raw.end(), checksum.begin());
  LatentIndex index(static_cast<int>(dim), checksum);
  std::vector<float> vec(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string id = r.str();
    r.f32s(vec);
    try {
      index.add(id, vec);
    } catch (const FieldError& e) {
      throw FormatError(std::string("index: ") + e.what());
    }
  }
  if (r.remaining() != 0) throw FormatError("index has trailing bytes");
  return index;
}

void save_index(const LatentIndex& index, const std::string& path) { detail::write_file(path, encode_index(index)); }

LatentIndex load_index(const std::string& path) { return decode_index(detail::read_file(path)); }

LatentIndex load_index(const std::string& path, const Digest& expected) {
  LatentIndex index = load_index(path);
  index.verify(expected);
  return index;
}

}  // namespace wae
