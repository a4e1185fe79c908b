#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radstack/common.hpp"
#include "radstack/forest.hpp"
#include "radstack/matrix.hpp"
#include "radstack/metrics.hpp"
#include "radstack/svm.hpp"

namespace radstack {

using json = nlohmann::ordered_json;

/// One-way ANOVA F = MS_between / MS_within; +inf when only the within-group
/// variance degenerates, 0 when both do.
inline double anova_f(const std::vector<double>& x, const std::vector<int>& y) {
  if (x.size() != y.size()) throw validation_error("anova_f: length mismatch");
  std::map<int, std::pair<double, std::size_t>> groups;  // class -> (sum, count)
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto& g = groups[y[i]];
    g.first += x[i];
    g.second += 1;
  }
  const std::size_t k = groups.size();
  if (k < 2) throw validation_error("anova_f: single class");
  const std::size_t n = x.size();
  if (n < k + 1) throw validation_error("anova_f: too few samples");

  double grand = 0;
  for (const auto& [cls, g] : groups) grand += g.first;
  grand /= static_cast<double>(n);

  double ss_between = 0;
  for (const auto& [cls, g] : groups) {
    const double gm = g.first / static_cast<double>(g.second);
    ss_between += static_cast<double>(g.second) * (gm - grand) * (gm - grand);
  }
  double ss_within = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& g = groups[y[i]];
    const double gm = g.first / static_cast<double>(g.second);
    ss_within += (x[i] - gm) * (x[i] - gm);
  }
  const double ms_between = ss_between / static_cast<double>(k - 1);
  const double ms_within = ss_within / static_cast<double>(n - k);
  if (ms_within == 0) return ms_between > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return ms_between / ms_within;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, sa = 0, sb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    sa += (a[i] - ma) * (a[i] - ma);
    sb += (b[i] - mb) * (b[i] - mb);
  }
  if (sa == 0 || sb == 0) return 0.0;  // constant columns carry no redundancy signal
  return sab / std::sqrt(sa * sb);
}

enum class SelectionMethod { MRMR, RFE_SVM };

inline const char* to_token(SelectionMethod m) { return m == SelectionMethod::MRMR ? "mrmr" : "rfe-svm"; }

/// Relevance/redundancy combination for MRMR: quotient (FCQ) divides the F
/// statistic by the mean absolute correlation, difference (FCD) subtracts it.
enum class MrmrScheme { quotient, difference };

struct SelectionResult {
  SelectionMethod method = SelectionMethod::MRMR;
  std::vector<std::size_t> selected;        // column indices, selection order
  std::vector<std::string> selected_names;  // descriptor strings, same order
  std::vector<double> relevance;            // per selected feature: F score
  std::vector<std::size_t> eliminated;      // RFE: dropped columns, one per round
};

/// Greedy MRMR. First pick maximizes F; later picks maximize the quotient
/// F / max(eps, mean |corr| to the selected set) or, under the difference
/// scheme, F - mean |corr|. Ties break toward the lower column index.
inline SelectionResult mrmr(const FeatureMatrix& m, const std::vector<int>& y, std::size_t n_select,
                            const std::vector<std::size_t>* candidates = nullptr,
                            MrmrScheme scheme = MrmrScheme::quotient) {
  std::vector<std::size_t> pool;
  if (candidates) pool = *candidates;
  else
    for (std::size_t c = 0; c < m.cols(); ++c) pool.push_back(c);
  if (n_select > pool.size()) throw validation_error("mrmr: asked for more features than available");

  constexpr double eps = 1e-12;
  std::vector<std::vector<double>> cols(pool.size());
  std::vector<double> f_score(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    cols[i] = m.column(pool[i]);
    f_score[i] = anova_f(cols[i], y);
  }

  SelectionResult res;
  res.method = SelectionMethod::MRMR;
  std::vector<bool> taken(pool.size(), false);
  std::vector<double> corr_sum(pool.size(), 0.0);
  for (std::size_t round = 0; round < n_select; ++round) {
    std::ptrdiff_t best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      double score;
      if (round == 0) {
        score = f_score[i];
      } else {
        const double redundancy = corr_sum[i] / static_cast<double>(round);
        score = scheme == MrmrScheme::quotient ? f_score[i] / std::max(eps, redundancy)
                                               : f_score[i] - redundancy;
      }
      if (score > best_score) {
        best_score = score;
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    const auto b = static_cast<std::size_t>(best);
    taken[b] = true;
    res.selected.push_back(pool[b]);
    res.selected_names.push_back(m.descriptors[pool[b]].str());
    res.relevance.push_back(f_score[b]);
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!taken[i]) corr_sum[i] += std::abs(pearson(cols[i], cols[b]));
  }
  return res;
}

/// RFE with the in-house linear SVM, step 1: train on survivors, drop the
/// single feature with minimal importance w_j^2 (ties drop the higher column
/// index). Multiclass uses one-vs-rest SVMs with summed squared weights.
inline SelectionResult rfe_svm(const FeatureMatrix& m, const std::vector<int>& y, std::size_t n_select,
                               double C = 1.0, std::uint64_t seed = 0,
                               const std::vector<std::size_t>* candidates = nullptr) {
  std::vector<std::size_t> survivors;
  if (candidates) survivors = *candidates;
  else
    for (std::size_t c = 0; c < m.cols(); ++c) survivors.push_back(c);
  if (n_select > survivors.size()) throw validation_error("rfe_svm: asked for more features than available");

  std::set<int> class_set(y.begin(), y.end());
  if (class_set.size() < 2) throw validation_error("rfe_svm: single class");
  const std::vector<int> classes(class_set.begin(), class_set.end());

  const std::size_t n = m.rows();
  SelectionResult res;
  res.method = SelectionMethod::RFE_SVM;
  int round = 0;
  while (survivors.size() > n_select) {
    ++round;
    const std::size_t p = survivors.size();
    std::vector<double> X(n * p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) X[i * p + j] = m.at(i, survivors[j]);

    std::vector<double> importance(p, 0.0);
    if (classes.size() == 2) {
      std::vector<int> yb(n);
      for (std::size_t i = 0; i < n; ++i) yb[i] = y[i] == classes[1] ? 1 : -1;
      const auto model = train_linear_svm(X, yb, n, p, C, mix_seed(seed, static_cast<std::uint64_t>(round)));
      for (std::size_t j = 0; j < p; ++j) importance[j] = model.weights[j] * model.weights[j];
    } else {
      for (std::size_t cls = 0; cls < classes.size(); ++cls) {
        std::vector<int> yb(n);
        for (std::size_t i = 0; i < n; ++i) yb[i] = y[i] == classes[cls] ? 1 : -1;
        const auto model =
            train_linear_svm(X, yb, n, p, C, mix_seed(seed, static_cast<std::uint64_t>(round) * 8 + cls));
        for (std::size_t j = 0; j < p; ++j) importance[j] += model.weights[j] * model.weights[j];
      }
    }

    std::size_t worst = 0;
    for (std::size_t j = 1; j < p; ++j)
      if (importance[j] < importance[worst] ||
          (importance[j] == importance[worst] && survivors[j] > survivors[worst]))
        worst = j;
    res.eliminated.push_back(survivors[worst]);
    survivors.erase(survivors.begin() + static_cast<std::ptrdiff_t>(worst));
  }

  for (auto c : survivors) {
    res.selected.push_back(c);
    res.selected_names.push_back(m.descriptors[c].str());
    res.relevance.push_back(anova_f(m.column(c), y));
  }
  return res;
}

/// Univariate AUC: mean +- std of held-out AUC of a single-feature forest
/// over `iters` seeded stratified splits (macro one-vs-rest when multiclass).
inline std::pair<double, double> uauc(const std::vector<double>& feature, const std::vector<int>& y,
                                      int iters = 100, double train_frac = 0.7, std::uint64_t seed = 0,
                                      int n_trees = 200, int threads = 1) {
  const std::size_t n = feature.size();
  if (y.size() != n) throw validation_error("uauc: length mismatch");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[y[i]].push_back(i);
  for (const auto& [cls, rows] : by_class)
    if (rows.size() < 2)
      throw validation_error("uauc: class " + std::to_string(cls) + " too small to stratify");
  const std::vector<int> classes = [&] {
    std::vector<int> c;
    for (const auto& [cls, rows] : by_class) c.push_back(cls);
    return c;
  }();

  std::vector<double> aucs(static_cast<std::size_t>(iters), kNaN);
  parallel_for(static_cast<std::size_t>(iters), threads, [&](std::size_t it) {
    Rng rng(mix_seed(seed, it));
    std::vector<std::size_t> train, test;
    for (const auto& [cls, rows] : by_class) {
      auto shuffled = rows;
      rng.shuffle(shuffled);
      auto n_train = static_cast<std::size_t>(std::lround(train_frac * static_cast<double>(rows.size())));
      n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
      for (std::size_t i = 0; i < shuffled.size(); ++i)
        (i < n_train ? train : test).push_back(shuffled[i]);
    }
    std::vector<double> Xtr, Xte;
    std::vector<int> ytr, yte;
    for (auto r : train) {
      Xtr.push_back(feature[r]);
      ytr.push_back(y[r]);
    }
    for (auto r : test) {
      Xte.push_back(feature[r]);
      yte.push_back(y[r]);
    }
    ForestHyper hyper;
    hyper.n_estimators = n_trees;
    const auto forest = train_forest(Xtr, ytr, Xtr.size(), 1, hyper, mix_seed(seed, 1000003 + it), 1);

    if (classes.size() == 2) {
      std::vector<double> score(Xte.size());
      std::vector<int> bin(Xte.size());
      for (std::size_t i = 0; i < Xte.size(); ++i) {
        score[i] = forest.predict_proba(&Xte[i])[1];
        bin[i] = yte[i] == forest.classes[1] ? 1 : 0;
      }
      aucs[it] = roc_auc(score, bin).auc;
    } else {
      std::vector<double> probs(Xte.size() * classes.size());
      std::vector<int> yidx(Xte.size());
      for (std::size_t i = 0; i < Xte.size(); ++i) {
        const auto pr = forest.predict_proba(&Xte[i]);
        std::copy(pr.begin(), pr.end(), probs.begin() + static_cast<std::ptrdiff_t>(i * classes.size()));
        yidx[i] = static_cast<int>(std::lower_bound(forest.classes.begin(), forest.classes.end(), yte[i]) -
                                   forest.classes.begin());
      }
      aucs[it] = macro_ovr_auc(probs, Xte.size(), classes.size(), yidx).auc;
    }
  });

  const double m = mean_of(aucs);
  return {m, sample_std(aucs)};
}

inline json selection_to_json(const SelectionResult& res) {
  json j;
  j["method"] = to_token(res.method);
  j["selected"] = res.selected_names;
  json diag = json::object();
  for (std::size_t i = 0; i < res.selected_names.size(); ++i) {
    json d;
    d["relevance_f"] = std::isfinite(res.relevance[i]) ? json(res.relevance[i]) : json(nullptr);
    d["order"] = i;
    diag[res.selected_names[i]] = std::move(d);
  }
  j["diagnostics"] = std::move(diag);
  return j;
}

inline void save_selection(const SelectionResult& res, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write selection: " + path.string());
  out << selection_to_json(res).dump(2) << "\n";
}

inline std::vector<std::string> load_selection_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open selection: " + path.string());
  json j;
  in >> j;
  std::vector<std::string> names;
  for (const auto& s : j.at("selected")) names.push_back(s.get<std::string>());
  return names;
}

}  // namespace radstack
