#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radstack/common.hpp"
#include "radstack/matrix.hpp"
#include "radstack/tableprep.hpp"

namespace radstack {

/// Lin's concordance correlation coefficient with population (divide-by-n)
/// moments: 2*s_xy / (s_x^2 + s_y^2 + (mean_x - mean_y)^2). NaN when the
/// denominator is zero.
inline double ccc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw validation_error("ccc: length mismatch");
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) throw validation_error("ccc: need at least 2 samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sx += (x[i] - mx) * (x[i] - mx);
    sy += (y[i] - my) * (y[i] - my);
  }
  sxy /= n;
  sx /= n;
  sy /= n;
  const double denom = sx + sy + (mx - my) * (mx - my);
  return denom > 0 ? 2.0 * sxy / denom : kNaN;
}

/// Overall CCC across J raters: 2*sum_{j<k} s_jk over the summed pairwise
/// denominators; equivalently the variance-weighted average of pairwise CCCs.
inline double occc(const std::vector<std::vector<double>>& raters) {
  const std::size_t j_count = raters.size();
  if (j_count < 2) throw validation_error("occc: need at least 2 raters");
  const std::size_t n = raters[0].size();
  if (n < 2) throw validation_error("occc: need at least 2 samples");
  for (const auto& r : raters)
    if (r.size() != n) throw validation_error("occc: length mismatch");

  std::vector<double> means(j_count), vars(j_count);
  for (std::size_t j = 0; j < j_count; ++j) {
    double m = 0;
    for (double v : raters[j]) m += v;
    m /= static_cast<double>(n);
    double s = 0;
    for (double v : raters[j]) s += (v - m) * (v - m);
    means[j] = m;
    vars[j] = s / static_cast<double>(n);
  }
  double num = 0, den = 0;
  for (std::size_t j = 0; j < j_count; ++j)
    for (std::size_t k = j + 1; k < j_count; ++k) {
      double cov = 0;
      for (std::size_t i = 0; i < n; ++i) cov += (raters[j][i] - means[j]) * (raters[k][i] - means[k]);
      cov /= static_cast<double>(n);
      num += cov;
      den += vars[j] + vars[k] + (means[j] - means[k]) * (means[j] - means[k]);
    }
  return den > 0 ? 2.0 * num / den : kNaN;
}

/// ICC(2,1): two-way random effects, absolute agreement, single measurement.
inline double icc21(const std::vector<std::vector<double>>& raters) {
  const std::size_t j_count = raters.size();
  if (j_count < 2) throw validation_error("icc21: need at least 2 raters");
  const std::size_t n = raters[0].size();
  if (n < 2) throw validation_error("icc21: need at least 2 samples");
  for (const auto& r : raters)
    if (r.size() != n) throw validation_error("icc21: length mismatch");

  const double jn = static_cast<double>(j_count);
  const double nn = static_cast<double>(n);
  double grand = 0;
  for (const auto& r : raters)
    for (double v : r) grand += v;
  grand /= (jn * nn);

  double ss_rows = 0, ss_cols = 0, ss_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double rm = 0;
    for (std::size_t j = 0; j < j_count; ++j) rm += raters[j][i];
    rm /= jn;
    ss_rows += (rm - grand) * (rm - grand);
  }
  ss_rows *= jn;
  for (std::size_t j = 0; j < j_count; ++j) {
    double cm = 0;
    for (double v : raters[j]) cm += v;
    cm /= nn;
    ss_cols += (cm - grand) * (cm - grand);
  }
  ss_cols *= nn;
  for (std::size_t j = 0; j < j_count; ++j)
    for (std::size_t i = 0; i < n; ++i) ss_total += (raters[j][i] - grand) * (raters[j][i] - grand);

  const double ms_rows = ss_rows / (nn - 1.0);
  const double ms_cols = ss_cols / (jn - 1.0);
  const double ms_err = (ss_total - ss_rows - ss_cols) / ((nn - 1.0) * (jn - 1.0));
  const double denom = ms_rows + (jn - 1.0) * ms_err + (jn / nn) * (ms_cols - ms_err);
  return denom != 0 ? (ms_rows - ms_err) / denom : kNaN;
}

/// Per-rater feature tables with identical subject and descriptor order.
struct RaterStack {
  std::vector<std::string> rater_names;
  std::vector<FeatureMatrix> matrices;

  void validate() const {
    if (matrices.size() < 2) throw validation_error("rater stack needs at least 2 raters");
    for (const auto& m : matrices) {
      if (m.subject_ids != matrices[0].subject_ids)
        throw validation_error("rater stack: subject order differs between raters");
      if (m.descriptors != matrices[0].descriptors)
        throw validation_error("rater stack: descriptor order differs between raters");
    }
  }
};

struct StabilityReport {
  double tau = 0.95;
  std::vector<std::string> descriptors;   // descriptors scored (post pre-filter)
  std::vector<double> occc_values;        // aligned with descriptors
  std::vector<double> icc_values;         // aligned; empty if not computed
  std::vector<std::string> retained;      // occc finite and >= tau
  std::vector<std::string> augmented;     // retained + BRAIN shape + Age
};

/// Descriptor indices that stability analysis scores: excludes
/// segmentation-independent features (BRAIN shape, clinical Age) and
/// descriptors whose scaled MAD over the stacked rater values is zero.
inline std::vector<std::size_t> stability_prefilter(const RaterStack& stack) {
  const auto& descs = stack.matrices[0].descriptors;
  std::vector<std::size_t> keep;
  std::vector<double> pooled;
  for (std::size_t c = 0; c < descs.size(); ++c) {
    if (descs[c].region == Region::BRAIN || descs[c].family == Family::clinical) continue;
    pooled.clear();
    for (const auto& m : stack.matrices)
      for (std::size_t r = 0; r < m.rows(); ++r) {
        const double v = m.at(r, c);
        if (!std::isnan(v)) pooled.push_back(v);
      }
    if (pooled.empty()) continue;
    if (scaled_mad(pooled) > 0) keep.push_back(c);
  }
  return keep;
}

/// OCCC per descriptor over the rater stack; retained = {occc >= tau, finite}.
/// Consumes feature values only (never outcome labels); the output is a set
/// of descriptor names. BRAIN shape and Age re-attach in `augmented`.
inline StabilityReport stability_filter(const RaterStack& stack, double tau, bool compute_icc = false,
                                        int threads = 1) {
  stack.validate();
  StabilityReport rep;
  rep.tau = tau;
  const auto cols = stability_prefilter(stack);
  const auto& descs = stack.matrices[0].descriptors;
  rep.descriptors.reserve(cols.size());
  for (auto c : cols) rep.descriptors.push_back(descs[c].str());
  rep.occc_values.assign(cols.size(), kNaN);
  if (compute_icc) rep.icc_values.assign(cols.size(), kNaN);

  parallel_for(cols.size(), threads, [&](std::size_t k) {
    // complete-case agreement: only subjects finite for every rater count
    // (empty derived regions leave NaN rows in some raters' tables)
    const std::size_t j_count = stack.matrices.size();
    const std::size_t n = stack.matrices[0].rows();
    std::vector<std::vector<double>> vals(j_count);
    for (auto& v : vals) v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      bool complete = true;
      for (std::size_t j = 0; j < j_count; ++j)
        complete &= !std::isnan(stack.matrices[j].at(i, cols[k]));
      if (!complete) continue;
      for (std::size_t j = 0; j < j_count; ++j) vals[j].push_back(stack.matrices[j].at(i, cols[k]));
    }
    if (vals[0].size() < 2) return;  // occc stays NaN, excluded from retained
    rep.occc_values[k] = occc(vals);
    if (compute_icc) rep.icc_values[k] = icc21(vals);
  });

  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double v = rep.occc_values[k];
    if (std::isfinite(v) && v >= tau) rep.retained.push_back(rep.descriptors[k]);
  }
  rep.augmented = rep.retained;
  for (const auto& d : descs)
    if (d.region == Region::BRAIN || d.family == Family::clinical) rep.augmented.push_back(d.str());
  return rep;
}

inline json stability_report_to_json(const StabilityReport& rep) {
  json j;
  j["tau"] = rep.tau;
  json occ = json::object();
  for (std::size_t i = 0; i < rep.descriptors.size(); ++i)
    occ[rep.descriptors[i]] = std::isnan(rep.occc_values[i]) ? json(nullptr) : json(rep.occc_values[i]);
  j["occc"] = std::move(occ);
  if (!rep.icc_values.empty()) {
    json icc = json::object();
    for (std::size_t i = 0; i < rep.descriptors.size(); ++i)
      icc[rep.descriptors[i]] = std::isnan(rep.icc_values[i]) ? json(nullptr) : json(rep.icc_values[i]);
    j["icc"] = std::move(icc);
  }
  j["retained"] = rep.retained;
  j["augmented"] = rep.augmented;
  return j;
}

inline void save_stability_report(const StabilityReport& rep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write stability report: " + path.string());
  out << stability_report_to_json(rep).dump(2) << "\n";
}

inline std::set<std::string> load_stability_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open stability report: " + path.string());
  json j;
  in >> j;
  std::set<std::string> pool;
  const auto& arr = j.contains("augmented") ? j["augmented"] : j["retained"];
  for (const auto& d : arr) pool.insert(d.get<std::string>());
  return pool;
}

}  // namespace radstack
