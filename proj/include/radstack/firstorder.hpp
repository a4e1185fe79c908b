#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "radstack/common.hpp"
#include "radstack/filters.hpp"
#include "radstack/volume.hpp"

namespace radstack {

/// The 17 first-order features. Entropy and Uniformity are computed on the
/// discretized histogram; all others on raw in-ROI intensities. Energy has no
/// voxel-shift term. Zero-variance skewness/kurtosis emit NaN.
inline std::map<std::string, double> first_order(const VolumeGrid& vol, const RegionMask& mask,
                                                 const DiscretizedGrid& disc) {
  if (vol.dims != mask.dims) throw validation_error("first_order: geometry mismatch");
  std::vector<double> x;
  x.reserve(1024);
  std::map<int, std::size_t> hist;
  for (std::size_t i = 0; i < vol.values.size(); ++i) {
    if (!mask.voxels[i]) continue;
    x.push_back(vol.values[i]);
    ++hist[disc.bins[i]];
  }
  if (x.empty()) throw validation_error("first_order: empty mask");

  const auto n = static_cast<double>(x.size());
  std::sort(x.begin(), x.end());

  double sum = 0, sum2 = 0;
  for (double v : x) {
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  double m2 = 0, m3 = 0, m4 = 0, abs_dev = 0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    abs_dev += std::abs(d);
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  const double p10 = percentile_sorted(x, 10.0);
  const double p25 = percentile_sorted(x, 25.0);
  const double p75 = percentile_sorted(x, 75.0);
  const double p90 = percentile_sorted(x, 90.0);

  // robust MAD: values within [P10, P90], deviation from their own mean
  double rsum = 0;
  std::size_t rn = 0;
  for (double v : x)
    if (v >= p10 && v <= p90) {
      rsum += v;
      ++rn;
    }
  double rmad = 0;
  if (rn > 0) {
    const double rmean = rsum / static_cast<double>(rn);
    double racc = 0;
    for (double v : x)
      if (v >= p10 && v <= p90) racc += std::abs(v - rmean);
    rmad = racc / static_cast<double>(rn);
  }

  double entropy = 0, uniformity = 0;
  for (const auto& [bin, cnt] : hist) {
    const double p = static_cast<double>(cnt) / n;
    entropy -= p * std::log2(p);
    uniformity += p * p;
  }
  entropy += 0.0;  // normalize the single-bin -0.0

  std::map<std::string, double> out;
  out["Energy"] = sum2;
  out["Entropy"] = entropy;
  out["Minimum"] = x.front();
  out["Maximum"] = x.back();
  out["Percentile10"] = p10;
  out["Percentile90"] = p90;
  out["Mean"] = mean;
  out["Median"] = percentile_sorted(x, 50.0);
  out["InterquartileRange"] = p75 - p25;
  out["Range"] = x.back() - x.front();
  out["MeanAbsoluteDeviation"] = abs_dev / n;
  out["RobustMeanAbsoluteDeviation"] = rmad;
  out["RootMeanSquared"] = std::sqrt(sum2 / n);
  out["Skewness"] = m2 > 0 ? m3 / std::pow(m2, 1.5) : kNaN;
  out["Kurtosis"] = m2 > 0 ? m4 / (m2 * m2) : kNaN;
  out["Variance"] = m2;
  out["Uniformity"] = uniformity;
  return out;
}

}  // namespace radstack
