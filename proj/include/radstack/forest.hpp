#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "radstack/common.hpp"

namespace radstack {

struct ForestHyper {
  int n_estimators = 200;
  int max_features = 0;  // 0 -> floor(sqrt(p))
  bool balanced_class_weight = true;
  int min_samples_leaf = 1;
  bool bootstrap = true;
};

/// CART tree over row-major data; leaves store the weighted class
/// distribution. Nodes are stored flat; leaf distributions live in a shared
/// pool addressed by offset.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    int dist_offset = -1;
  };
  std::vector<Node> nodes;
  std::vector<double> leaf_dist;
  int n_classes = 0;

  const double* predict_dist(const double* x) const {
    int cur = 0;
    while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
      const auto& nd = nodes[static_cast<std::size_t>(cur)];
      cur = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return leaf_dist.data() + nodes[static_cast<std::size_t>(cur)].dist_offset;
  }
};

namespace detail {

struct TreeBuilder {
  const std::vector<double>& X;
  std::size_t n, p;
  const std::vector<int>& y;  // class indices 0..k-1
  const std::vector<double>& class_weight;
  int k;
  int max_features;
  int min_samples_leaf;
  Rng rng;
  DecisionTree tree;

  // scratch
  std::vector<std::size_t> feature_pool;
  std::vector<std::pair<double, int>> sorted_vals;

  int build(std::vector<std::size_t>& rows) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (auto r : rows) counts[static_cast<std::size_t>(y[r])] += class_weight[static_cast<std::size_t>(y[r])];
    double total = 0;
    for (double c : counts) total += c;
    double gini = 1.0;
    for (double c : counts) gini -= (c / total) * (c / total);

    bool make_leaf = gini <= 0 || rows.size() < 2 * static_cast<std::size_t>(min_samples_leaf) || rows.size() < 2;

    int best_feature = -1;
    double best_threshold = 0;
    double best_score = 0;  // impurity decrease must be strictly positive
    if (!make_leaf) {
      // draw max_features distinct candidates (partial Fisher-Yates)
      const int mf = std::min<int>(max_features, static_cast<int>(p));
      feature_pool.resize(p);
      for (std::size_t j = 0; j < p; ++j) feature_pool[j] = j;
      for (int c = 0; c < mf; ++c) {
        const std::size_t pick = static_cast<std::size_t>(c) + static_cast<std::size_t>(rng.next_below(p - static_cast<std::size_t>(c)));
        std::swap(feature_pool[static_cast<std::size_t>(c)], feature_pool[pick]);
        const std::size_t f = feature_pool[static_cast<std::size_t>(c)];

        sorted_vals.clear();
        for (auto r : rows) sorted_vals.emplace_back(X[r * p + f], y[r]);
        std::sort(sorted_vals.begin(), sorted_vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (sorted_vals.front().first == sorted_vals.back().first) continue;

        std::vector<double> left_counts(static_cast<std::size_t>(k), 0.0);
        double left_total = 0;
        for (std::size_t i = 0; i + 1 < sorted_vals.size(); ++i) {
          const double wgt = class_weight[static_cast<std::size_t>(sorted_vals[i].second)];
          left_counts[static_cast<std::size_t>(sorted_vals[i].second)] += wgt;
          left_total += wgt;
          if (sorted_vals[i].first == sorted_vals[i + 1].first) continue;
          const double right_total = total - left_total;
          double gl = 1.0, gr = 1.0;
          for (int cc = 0; cc < k; ++cc) {
            const double lc = left_counts[static_cast<std::size_t>(cc)];
            const double rc = counts[static_cast<std::size_t>(cc)] - lc;
            gl -= (lc / left_total) * (lc / left_total);
            gr -= (rc / right_total) * (rc / right_total);
          }
          const double score = gini - (left_total * gl + right_total * gr) / total;
          if (score > best_score + 1e-15) {
            best_score = score;
            best_feature = static_cast<int>(f);
            best_threshold = 0.5 * (sorted_vals[i].first + sorted_vals[i + 1].first);
          }
        }
      }
      if (best_feature < 0) make_leaf = true;
    }

    if (make_leaf) {
      auto& nd = tree.nodes[static_cast<std::size_t>(node_id)];
      nd.feature = -1;
      nd.dist_offset = static_cast<int>(tree.leaf_dist.size());
      for (double c : counts) tree.leaf_dist.push_back(c / total);
      return node_id;
    }

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (auto r : rows) {
      if (X[r * p + static_cast<std::size_t>(best_feature)] <= best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left_id = build(left_rows);
    const int right_id = build(right_rows);
    auto& nd = tree.nodes[static_cast<std::size_t>(node_id)];
    nd.feature = best_feature;
    nd.threshold = best_threshold;
    nd.left = left_id;
    nd.right = right_id;
    return node_id;
  }
};

}  // namespace detail

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::vector<int> classes;  // original labels, ascending
  std::uint64_t seed = 0;

  std::vector<double> predict_proba(const double* x) const {
    std::vector<double> acc(classes.size(), 0.0);
    for (const auto& t : trees) {
      const double* d = t.predict_dist(x);
      for (std::size_t c = 0; c < classes.size(); ++c) acc[c] += d[c];
    }
    const double inv = 1.0 / static_cast<double>(trees.size());
    for (auto& v : acc) v *= inv;
    return acc;
  }
};

/// 200 CART trees on bootstrap samples, floor(sqrt(p)) candidate features per
/// split, weighted-gini splits with balanced class weights w_c = n/(k*n_c)
/// computed on the fit-time labels. Fully deterministic given the seed.
inline RandomForest train_forest(const std::vector<double>& X, const std::vector<int>& y, std::size_t n,
                                 std::size_t p, const ForestHyper& hyper, std::uint64_t seed,
                                 int threads = 1) {
  if (n == 0 || y.size() != n || X.size() != n * p) throw validation_error("train_forest: bad shapes");
  RandomForest forest;
  forest.seed = seed;
  for (int v : y)
    if (std::find(forest.classes.begin(), forest.classes.end(), v) == forest.classes.end())
      forest.classes.push_back(v);
  std::sort(forest.classes.begin(), forest.classes.end());
  const int k = static_cast<int>(forest.classes.size());
  if (k < 2) throw validation_error("train_forest: single class");

  std::vector<int> yi(n);
  std::vector<double> class_count(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    yi[i] = static_cast<int>(std::lower_bound(forest.classes.begin(), forest.classes.end(), y[i]) -
                             forest.classes.begin());
    class_count[static_cast<std::size_t>(yi[i])] += 1.0;
  }
  std::vector<double> class_weight(static_cast<std::size_t>(k), 1.0);
  if (hyper.balanced_class_weight)
    for (int c = 0; c < k; ++c)
      class_weight[static_cast<std::size_t>(c)] =
          static_cast<double>(n) / (static_cast<double>(k) * class_count[static_cast<std::size_t>(c)]);

  const int mf = hyper.max_features > 0
                     ? hyper.max_features
                     : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));

  forest.trees.resize(static_cast<std::size_t>(hyper.n_estimators));
  parallel_for(static_cast<std::size_t>(hyper.n_estimators), threads, [&](std::size_t t) {
    detail::TreeBuilder builder{X, n, p, yi, class_weight, k, mf, hyper.min_samples_leaf,
                                Rng(mix_seed(seed, t)), {}, {}, {}};
    std::vector<std::size_t> rows(n);
    if (hyper.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::size_t>(builder.rng.next_below(n));
    } else {
      for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    }
    builder.tree.n_classes = k;
    builder.build(rows);
    forest.trees[t] = std::move(builder.tree);
  });
  return forest;
}

}  // namespace radstack
