#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "radstack/common.hpp"
#include "radstack/matrix.hpp"

namespace radstack {

using json = nlohmann::ordered_json;

/// Normal-consistent MAD scale factor 1/(sqrt(2)*erfcinv(3/2)).
inline constexpr double kMadScale = 1.4826022185056018;

/// c * median(|x - median(x)|) with the normal-consistency constant c.
/// NaNs are ignored; all-NaN input is an error.
inline double scaled_mad(const std::vector<double>& x) {
  std::vector<double> clean;
  clean.reserve(x.size());
  for (double v : x)
    if (!std::isnan(v)) clean.push_back(v);
  if (clean.empty()) throw validation_error("scaled_mad: all values are NaN");
  const double med = median_of(clean);
  for (auto& v : clean) v = std::abs(v - med);
  return kMadScale * median_of(clean);
}

/// Per-descriptor preprocessing statistics fitted on the discovery set.
struct ColumnStats {
  std::vector<std::string> descriptors;
  std::vector<double> impute_mean;  // mean of non-outlier, non-NaN values
  std::vector<double> z_mean;
  std::vector<double> z_std;        // 0 marks a degenerate column (maps to 0)
};

/// Discovery-set cleaning: per column, values with |v - median| > 3*scaled_mad
/// are outliers; outliers and NaNs are replaced by the mean of the remaining
/// values, then the column is z-scored with its own (population) moments.
/// Zero-std columns map to all zeros.
inline std::pair<FeatureMatrix, ColumnStats> fit_clean(const FeatureMatrix& discovery) {
  FeatureMatrix cleaned = discovery;
  ColumnStats stats;
  stats.descriptors.reserve(discovery.cols());
  for (const auto& d : discovery.descriptors) stats.descriptors.push_back(d.str());
  stats.impute_mean.assign(discovery.cols(), 0.0);
  stats.z_mean.assign(discovery.cols(), 0.0);
  stats.z_std.assign(discovery.cols(), 0.0);

  const std::size_t n = discovery.rows();
  std::vector<double> col(n);
  for (std::size_t c = 0; c < discovery.cols(); ++c) {
    for (std::size_t r = 0; r < n; ++r) col[r] = discovery.at(r, c);

    std::vector<double> finite;
    finite.reserve(n);
    for (double v : col)
      if (!std::isnan(v)) finite.push_back(v);

    double impute = 0.0;
    std::vector<bool> keep(n, false);
    if (!finite.empty()) {
      const double med = median_of(finite);
      std::vector<double> dev = finite;
      for (auto& v : dev) v = std::abs(v - med);
      const double mad = kMadScale * median_of(dev);
      double sum = 0;
      std::size_t cnt = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const double v = col[r];
        if (std::isnan(v)) continue;
        if (std::abs(v - med) > 3.0 * mad) continue;  // strict > per outlier rule
        keep[r] = true;
        sum += v;
        ++cnt;
      }
      // a column whose every value is an outlier degenerates to its median
      impute = cnt > 0 ? sum / static_cast<double>(cnt) : med;
    }
    stats.impute_mean[c] = impute;

    for (std::size_t r = 0; r < n; ++r)
      if (!keep[r]) col[r] = impute;

    double m = 0;
    for (double v : col) m += v;
    m /= static_cast<double>(n);
    double var = 0;
    for (double v : col) var += (v - m) * (v - m);
    const double sd = std::sqrt(var / static_cast<double>(n));
    stats.z_mean[c] = m;
    stats.z_std[c] = sd;
    for (std::size_t r = 0; r < n; ++r)
      cleaned.at(r, c) = sd > 0 ? (col[r] - m) / sd : 0.0;
  }
  return {std::move(cleaned), std::move(stats)};
}

/// Test-set transform: NaNs take the discovery impute mean, then the
/// discovery z-transform is applied. No statistic is computed on test data
/// and no outlier detection runs.
inline FeatureMatrix apply_clean(const FeatureMatrix& test, const ColumnStats& stats) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(stats.descriptors.size());
  for (std::size_t i = 0; i < stats.descriptors.size(); ++i) index.emplace(stats.descriptors[i], i);
  std::vector<std::size_t> map(test.cols());
  for (std::size_t c = 0; c < test.cols(); ++c) {
    const std::string key = test.descriptors[c].str();
    auto it = index.find(key);
    if (it == index.end()) throw validation_error("apply_clean: descriptor not fitted: " + key);
    map[c] = it->second;
  }
  FeatureMatrix out = test;
  for (std::size_t c = 0; c < test.cols(); ++c) {
    const std::size_t s = map[c];
    for (std::size_t r = 0; r < test.rows(); ++r) {
      double v = test.at(r, c);
      if (std::isnan(v)) v = stats.impute_mean[s];
      out.at(r, c) = stats.z_std[s] > 0 ? (v - stats.z_mean[s]) / stats.z_std[s] : 0.0;
    }
  }
  return out;
}

/// Descriptor indices with nonzero scaled MAD (noninformative columns drop).
inline std::vector<std::size_t> mad_filter(const FeatureMatrix& m) {
  std::vector<std::size_t> keep;
  std::vector<double> col(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    bool all_nan = true;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      col[r] = m.at(r, c);
      all_nan &= std::isnan(col[r]);
    }
    if (all_nan) continue;
    if (scaled_mad(col) > 0) keep.push_back(c);
  }
  return keep;
}

inline json column_stats_to_json(const ColumnStats& s) {
  json j;
  json cols = json::object();
  for (std::size_t i = 0; i < s.descriptors.size(); ++i) {
    cols[s.descriptors[i]] = {{"impute_mean", s.impute_mean[i]},
                              {"z_mean", s.z_mean[i]},
                              {"z_std", s.z_std[i]}};
  }
  j["columns"] = std::move(cols);
  return j;
}

inline ColumnStats column_stats_from_json(const json& j) {
  ColumnStats s;
  for (const auto& [k, v] : j.at("columns").items()) {
    s.descriptors.push_back(k);
    s.impute_mean.push_back(v.at("impute_mean").get<double>());
    s.z_mean.push_back(v.at("z_mean").get<double>());
    s.z_std.push_back(v.at("z_std").get<double>());
  }
  return s;
}

inline void save_column_stats(const ColumnStats& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write stats: " + path.string());
  out << column_stats_to_json(s).dump(2) << "\n";
}

inline ColumnStats load_column_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open stats: " + path.string());
  json j;
  in >> j;
  return column_stats_from_json(j);
}

}  // namespace radstack
