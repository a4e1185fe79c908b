#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "radstack/common.hpp"

namespace radstack {

/// Midranks (average ranks for ties), 1-based, in input order.
inline std::vector<double> midranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = r;
    i = j + 1;
  }
  return rank;
}

struct RocResult {
  double auc = kNaN;
  std::vector<double> per_class_auc;  // multiclass only
  std::size_t n_pos = 0, n_neg = 0;
  bool degenerate_class = false;  // some OVR split had a single class
};

/// Tie-aware Mann-Whitney AUC via midranks:
/// (R_pos - n_pos(n_pos+1)/2) / (n_pos * n_neg).
inline RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw validation_error("roc_auc: length mismatch");
  RocResult res;
  for (int l : labels) {
    if (l == 1) ++res.n_pos;
    else if (l == 0) ++res.n_neg;
    else throw validation_error("roc_auc: labels must be 0/1");
  }
  if (res.n_pos == 0 || res.n_neg == 0) throw validation_error("roc_auc: single-class input");
  const auto rank = midranks(scores);
  double r_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) r_pos += rank[i];
  const double m = static_cast<double>(res.n_pos);
  res.auc = (r_pos - m * (m + 1.0) / 2.0) / (m * static_cast<double>(res.n_neg));
  return res;
}

/// Macro one-vs-rest AUC for multiclass probability scores (row-major n x k).
/// Classes absent from the labels yield NaN per-class AUC and are excluded
/// from the macro mean (flagged).
inline RocResult macro_ovr_auc(const std::vector<double>& probs, std::size_t n, std::size_t k,
                               const std::vector<int>& labels) {
  if (labels.size() != n || probs.size() != n * k) throw validation_error("macro_ovr_auc: bad shapes");
  RocResult res;
  res.per_class_auc.assign(k, kNaN);
  double sum = 0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> score(n);
    std::vector<int> bin(n);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      score[i] = probs[i * k + c];
      bin[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
      pos += static_cast<std::size_t>(bin[i]);
    }
    if (pos == 0 || pos == n) {
      res.degenerate_class = true;
      continue;
    }
    res.per_class_auc[c] = roc_auc(score, bin).auc;
    sum += res.per_class_auc[c];
    ++used;
  }
  res.auc = used > 0 ? sum / static_cast<double>(used) : kNaN;
  return res;
}

struct DelongResult {
  double auc_a = kNaN, auc_b = kNaN;
  double var_a = kNaN, var_b = kNaN, cov_ab = kNaN;
  double z = kNaN, p = kNaN;
  bool exact_difference = false;  // zero variance with unequal AUCs
};

namespace detail {

/// Structural components via the Sun-Xu midrank formulation. Positives:
/// V10_i = (T_i - TX_i)/n_neg; negatives: V01_j = 1 - (T_j - TY_j)/n_pos.
inline void delong_components(const std::vector<double>& scores, const std::vector<int>& labels,
                              std::vector<double>& v10, std::vector<double>& v01, double& auc) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  const std::size_t m = pos.size(), n = neg.size();
  if (m == 0 || n == 0) throw validation_error("delong: single-class input");

  std::vector<double> all;
  all.reserve(m + n);
  all.insert(all.end(), pos.begin(), pos.end());
  all.insert(all.end(), neg.begin(), neg.end());
  const auto t_all = midranks(all);
  const auto t_pos = midranks(pos);
  const auto t_neg = midranks(neg);

  v10.resize(m);
  v01.resize(n);
  double sum_t_pos = 0;
  for (std::size_t i = 0; i < m; ++i) {
    v10[i] = (t_all[i] - t_pos[i]) / static_cast<double>(n);
    sum_t_pos += t_all[i];
  }
  for (std::size_t j = 0; j < n; ++j)
    v01[j] = 1.0 - (t_all[m + j] - t_neg[j]) / static_cast<double>(m);
  auc = (sum_t_pos - static_cast<double>(m) * (static_cast<double>(m) + 1.0) / 2.0) /
        (static_cast<double>(m) * static_cast<double>(n));
}

inline double sample_cov(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(n - 1);
}

}  // namespace detail

/// Fast DeLong comparison of two paired score vectors on the same labels.
/// z = (aucA - aucB)/sqrt(varA + varB - 2cov), two-sided normal p.
inline DelongResult delong_test(const std::vector<double>& scores_a, const std::vector<double>& scores_b,
                                const std::vector<int>& labels) {
  if (scores_a.size() != labels.size() || scores_b.size() != labels.size())
    throw validation_error("delong_test: length mismatch");
  DelongResult res;
  std::vector<double> v10a, v01a, v10b, v01b;
  detail::delong_components(scores_a, labels, v10a, v01a, res.auc_a);
  detail::delong_components(scores_b, labels, v10b, v01b, res.auc_b);
  const double m = static_cast<double>(v10a.size());
  const double n = static_cast<double>(v01a.size());

  const double s10_aa = detail::sample_cov(v10a, v10a), s01_aa = detail::sample_cov(v01a, v01a);
  const double s10_bb = detail::sample_cov(v10b, v10b), s01_bb = detail::sample_cov(v01b, v01b);
  const double s10_ab = detail::sample_cov(v10a, v10b), s01_ab = detail::sample_cov(v01a, v01b);
  res.var_a = s10_aa / m + s01_aa / n;
  res.var_b = s10_bb / m + s01_bb / n;
  res.cov_ab = s10_ab / m + s01_ab / n;

  const double var_diff = res.var_a + res.var_b - 2.0 * res.cov_ab;
  const double delta = res.auc_a - res.auc_b;
  if (var_diff <= 0) {
    if (delta == 0) {
      res.z = 0;
      res.p = 1.0;
    } else {
      res.exact_difference = true;
      res.z = delta > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
    }
    return res;
  }
  res.z = delta / std::sqrt(var_diff);
  res.p = normal_two_sided_p(res.z);
  return res;
}

/// Relative standard deviation in percent: 100 * sample std / mean.
inline double rsd(const std::vector<double>& values) {
  if (values.size() < 2) throw validation_error("rsd: need at least 2 values");
  const double m = mean_of(values);
  if (m == 0) throw validation_error("rsd: zero mean");
  return 100.0 * sample_std(values) / m;
}

}  // namespace radstack
