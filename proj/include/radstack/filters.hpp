#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "radstack/common.hpp"
#include "radstack/volume.hpp"

namespace radstack {

struct FilterSpec {
  enum class Kind { original, wavelet, log };
  Kind kind = Kind::original;
  std::string wavelet_band;  // 3 letters over {L,H}, letter order (x, y, z)
  double sigma_mm = 0.0;

  std::string token() const {
    switch (kind) {
      case Kind::original: return "original";
      case Kind::wavelet: return "wavelet-" + wavelet_band;
      case Kind::log: {
        const int s = static_cast<int>(sigma_mm + 0.5);
        return "log-sigma-" + std::to_string(s);
      }
    }
    return "?";
  }
};

namespace detail {

/// One separable correlation pass along `axis` with mirror boundary.
inline void axis_convolve(const VolumeGrid& in, VolumeGrid& out, int axis,
                          const std::vector<double>& taps, int origin) {
  const Dims d = in.dims;
  const int n_axis = axis == 0 ? d.nx : axis == 1 ? d.ny : d.nz;
  std::vector<double> line(static_cast<std::size_t>(n_axis));
  std::vector<double> res(static_cast<std::size_t>(n_axis));
  const int t = static_cast<int>(taps.size());

  auto run_line = [&](auto&& get, auto&& set) {
    for (int i = 0; i < n_axis; ++i) line[static_cast<std::size_t>(i)] = get(i);
    for (int i = 0; i < n_axis; ++i) {
      double acc = 0;
      for (int k = 0; k < t; ++k)
        acc += taps[static_cast<std::size_t>(k)] * line[static_cast<std::size_t>(mirror_index(i + k - origin, n_axis))];
      res[static_cast<std::size_t>(i)] = acc;
    }
    for (int i = 0; i < n_axis; ++i) set(i, res[static_cast<std::size_t>(i)]);
  };

  if (axis == 0) {
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        run_line([&](int i) { return in.at(i, y, z); }, [&](int i, double v) { out.at(i, y, z) = v; });
  } else if (axis == 1) {
    for (int z = 0; z < d.nz; ++z)
      for (int x = 0; x < d.nx; ++x)
        run_line([&](int i) { return in.at(x, i, z); }, [&](int i, double v) { out.at(x, i, z) = v; });
  } else {
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        run_line([&](int i) { return in.at(x, y, i); }, [&](int i, double v) { out.at(x, y, i) = v; });
  }
}

inline std::vector<double> gaussian_taps(double sigma_mm, double spacing, int& origin) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma_mm / spacing)));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int k = -radius; k <= radius; ++k) {
    const double x = k * spacing;
    const double w = std::exp(-x * x / (2.0 * sigma_mm * sigma_mm));
    taps[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (auto& w : taps) w /= sum;
  origin = radius;
  return taps;
}

}  // namespace detail

/// Scale-normalized Laplacian of Gaussian: sigma^2 * Lap(G_sigma * I).
/// Separable Gaussian truncated at 4*sigma (converted to voxels per axis via
/// spacing), mirror boundary; Laplacian as second central differences scaled
/// by spacing^2 per axis.
inline VolumeGrid log_filter(const VolumeGrid& vol, double sigma_mm) {
  vol.validate();
  if (!(sigma_mm > 0)) throw validation_error("log_filter: sigma must be > 0");
  if (vol.dims.nx < 3 || vol.dims.ny < 3 || vol.dims.nz < 3)
    throw validation_error("log_filter: volume must be at least 3 voxels along every axis");

  VolumeGrid blur = vol;
  VolumeGrid tmp = make_volume(vol.dims, vol.spacing_mm);
  for (int axis = 0; axis < 3; ++axis) {
    int origin = 0;
    const auto taps = detail::gaussian_taps(sigma_mm, vol.spacing_mm[static_cast<std::size_t>(axis)], origin);
    detail::axis_convolve(blur, tmp, axis, taps, origin);
    std::swap(blur, tmp);
  }

  VolumeGrid out = make_volume(vol.dims, vol.spacing_mm);
  const Dims d = vol.dims;
  const double s2 = sigma_mm * sigma_mm;
  const double ix2 = 1.0 / (vol.spacing_mm[0] * vol.spacing_mm[0]);
  const double iy2 = 1.0 / (vol.spacing_mm[1] * vol.spacing_mm[1]);
  const double iz2 = 1.0 / (vol.spacing_mm[2] * vol.spacing_mm[2]);
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const double c = blur.at(x, y, z);
        const double lap =
            (blur.at(mirror_index(x - 1, d.nx), y, z) + blur.at(mirror_index(x + 1, d.nx), y, z) - 2 * c) * ix2 +
            (blur.at(x, mirror_index(y - 1, d.ny), z) + blur.at(x, mirror_index(y + 1, d.ny), z) - 2 * c) * iy2 +
            (blur.at(x, y, mirror_index(z - 1, d.nz)) + blur.at(x, y, mirror_index(z + 1, d.nz)) - 2 * c) * iz2;
        out.at(x, y, z) = s2 * lap;
      }
  return out;
}

/// Single-level undecimated separable Haar transform: L = [1,1]/sqrt(2),
/// H = [1,-1]/sqrt(2), taps at (i, i+1), mirror boundary. Output grids keep
/// the input dims so region masks apply unchanged. Band letters are (x,y,z).
inline std::map<std::string, VolumeGrid> wavelet_subbands(const VolumeGrid& vol) {
  vol.validate();
  static const double inv_sqrt2 = 0.70710678118654752440;
  const std::vector<double> lo = {inv_sqrt2, inv_sqrt2};
  const std::vector<double> hi = {inv_sqrt2, -inv_sqrt2};

  // Expand one axis at a time: 1 -> 2 -> 4 -> 8 partial volumes.
  std::map<std::string, VolumeGrid> bands;
  bands[""] = vol;
  for (int axis = 0; axis < 3; ++axis) {
    std::map<std::string, VolumeGrid> next;
    for (auto& [key, grid] : bands) {
      VolumeGrid l = make_volume(vol.dims, vol.spacing_mm);
      VolumeGrid h = make_volume(vol.dims, vol.spacing_mm);
      detail::axis_convolve(grid, l, axis, lo, 0);
      detail::axis_convolve(grid, h, axis, hi, 0);
      next[key + "L"] = std::move(l);
      next[key + "H"] = std::move(h);
    }
    bands = std::move(next);
  }
  return bands;
}

inline VolumeGrid apply_filter(const VolumeGrid& vol, const FilterSpec& spec) {
  switch (spec.kind) {
    case FilterSpec::Kind::original: return vol;
    case FilterSpec::Kind::log: return log_filter(vol, spec.sigma_mm);
    case FilterSpec::Kind::wavelet: {
      auto bands = wavelet_subbands(vol);
      auto it = bands.find(spec.wavelet_band);
      if (it == bands.end()) throw validation_error("unknown wavelet band " + spec.wavelet_band);
      return std::move(it->second);
    }
  }
  throw validation_error("bad filter spec");
}

// ---------------------------------------------------------------------------
// Gray-level discretization.
// ---------------------------------------------------------------------------

struct DiscretizeScheme {
  enum class Kind { fixed_bin_count, fixed_bin_width };
  Kind kind = Kind::fixed_bin_count;
  int bin_count = 32;
  double bin_width = 25.0;
};

/// Bin labels 1..n_bins inside the ROI, 0 outside.
struct DiscretizedGrid {
  Dims dims;
  Spacing spacing_mm{1.0, 1.0, 1.0};
  std::vector<int> bins;
  int n_bins = 0;

  int at(int x, int y, int z) const { return bins[voxel_index(dims, x, y, z)]; }
};

/// Fixed-bin-count: bin = min(Nb, floor((v-min)/(max-min)*Nb) + 1);
/// fixed-bin-width: bin = floor((v-min)/w) + 1. Degenerate max==min -> all 1.
inline DiscretizedGrid discretize(const VolumeGrid& vol, const RegionMask& mask,
                                  const DiscretizeScheme& scheme = {}) {
  if (vol.dims != mask.dims) throw validation_error("discretize: volume/mask geometry mismatch");
  DiscretizedGrid out;
  out.dims = vol.dims;
  out.spacing_mm = vol.spacing_mm;
  out.bins.assign(vol.values.size(), 0);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (std::size_t i = 0; i < vol.values.size(); ++i) {
    if (!mask.voxels[i]) continue;
    ++count;
    lo = std::min(lo, vol.values[i]);
    hi = std::max(hi, vol.values[i]);
  }
  if (count == 0) throw validation_error("discretize: empty mask");

  int max_bin = 1;
  if (hi == lo) {
    for (std::size_t i = 0; i < vol.values.size(); ++i)
      if (mask.voxels[i]) out.bins[i] = 1;
  } else if (scheme.kind == DiscretizeScheme::Kind::fixed_bin_count) {
    const int nb = scheme.bin_count;
    if (nb < 1) throw validation_error("discretize: bin count must be >= 1");
    const double scale = static_cast<double>(nb) / (hi - lo);
    for (std::size_t i = 0; i < vol.values.size(); ++i) {
      if (!mask.voxels[i]) continue;
      int b = static_cast<int>(std::floor((vol.values[i] - lo) * scale)) + 1;
      b = std::min(b, nb);
      out.bins[i] = b;
      max_bin = std::max(max_bin, b);
    }
  } else {
    if (!(scheme.bin_width > 0)) throw validation_error("discretize: bin width must be > 0");
    for (std::size_t i = 0; i < vol.values.size(); ++i) {
      if (!mask.voxels[i]) continue;
      const int b = static_cast<int>(std::floor((vol.values[i] - lo) / scheme.bin_width)) + 1;
      out.bins[i] = b;
      max_bin = std::max(max_bin, b);
    }
  }
  out.n_bins = max_bin;
  return out;
}

}  // namespace radstack
