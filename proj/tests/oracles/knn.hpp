#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "wae/search_index.hpp"

namespace wae::oracle {

// Full sort of (distance, id) pairs, distances accumulated in double.
inline SearchResult brute_force_knn(const std::vector<std::string>& ids, const std::vector<std::vector<float>>& vecs,
                                    const std::vector<float>& q, int k) {
  std::vector<std::pair<double, std::string>> all;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double d = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double diff = static_cast<double>(vecs[i][j]) - q[j];
      d += diff * diff;
    }
    all.emplace_back(d, ids[i]);
  }
  std::sort(all.begin(), all.end());
  SearchResult out;
  for (int r = 0; r < std::min<int>(k, static_cast<int>(all.size())); ++r) out.push_back({all[r].second, all[r].first, r + 1});
  return out;
}

}  // namespace wae::oracle
