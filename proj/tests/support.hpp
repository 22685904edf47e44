#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wae/rng.hpp"
#include "wae/ui_model.hpp"

namespace wae::testing {

// Random valid screen with `n` components of random type and bounds.
inline UIScreen random_screen(SplitMix64& rng, int n, int width = 360, int height = 640) {
  UIScreen s;
  s.id = "r" + std::to_string(rng.next() % 100000);
  s.width = width;
  s.height = height;
  for (int i = 0; i < n; ++i) {
    const int l = rng.range(0, width - 2);
    const int t = rng.range(0, height - 2);
    const int r = rng.range(l + 1, width);
    const int b = rng.range(t + 1, height);
    s.components.push_back({component_from_code(rng.range(0, kComponentTypeCount - 1)), {l, t, r, b}});
  }
  return s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("wae-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace wae::testing
