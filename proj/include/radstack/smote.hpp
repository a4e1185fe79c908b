#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "radstack/common.hpp"

namespace radstack {

/// SMOTE: upsample every non-majority class to the majority count. Each
/// synthetic sample is x + u*(nn - x) with u ~ U(0,1) and nn one of the
/// k nearest same-class neighbours (Euclidean; k capped at n_class - 1).
/// A balanced input is returned unchanged.
inline void smote(std::vector<double>& X, std::vector<int>& y, std::size_t p, int k, std::uint64_t seed) {
  const std::size_t n = y.size();
  if (X.size() != n * p) throw validation_error("smote: bad shapes");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[y[i]].push_back(i);
  if (by_class.size() < 2) throw validation_error("smote: need at least 2 classes");

  std::size_t majority = 0;
  for (const auto& [cls, rows] : by_class) majority = std::max(majority, rows.size());
  bool balanced = true;
  for (const auto& [cls, rows] : by_class) balanced &= (rows.size() == majority);
  if (balanced) return;

  for (const auto& [cls, rows] : by_class)
    if (rows.size() < 2)
      throw validation_error("smote: class " + std::to_string(cls) + " has fewer than 2 samples");

  Rng rng(seed);
  for (const auto& [cls, rows] : by_class) {
    const std::size_t need = majority - rows.size();
    if (need == 0) continue;
    const int k_eff = std::min<int>(k, static_cast<int>(rows.size()) - 1);

    // k nearest same-class neighbours per class sample, ties broken by index
    std::vector<std::vector<std::size_t>> nn(rows.size());
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      dist.clear();
      for (std::size_t b = 0; b < rows.size(); ++b) {
        if (a == b) continue;
        double d2 = 0;
        for (std::size_t j = 0; j < p; ++j) {
          const double diff = X[rows[a] * p + j] - X[rows[b] * p + j];
          d2 += diff * diff;
        }
        dist.emplace_back(d2, rows[b]);
      }
      std::sort(dist.begin(), dist.end());
      nn[a].reserve(static_cast<std::size_t>(k_eff));
      for (int t = 0; t < k_eff; ++t) nn[a].push_back(dist[static_cast<std::size_t>(t)].second);
    }

    for (std::size_t s = 0; s < need; ++s) {
      const std::size_t a = static_cast<std::size_t>(rng.next_below(rows.size()));
      const std::size_t b = nn[a][static_cast<std::size_t>(rng.next_below(nn[a].size()))];
      const double u = rng.next_double();
      const std::size_t base = rows[a];
      for (std::size_t j = 0; j < p; ++j)
        X.push_back(X[base * p + j] + u * (X[b * p + j] - X[base * p + j]));
      y.push_back(cls);
    }
  }
}

}  // namespace radstack
