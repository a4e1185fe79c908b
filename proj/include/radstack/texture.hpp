#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "radstack/common.hpp"
#include "radstack/filters.hpp"
#include "radstack/volume.hpp"

namespace radstack {

/// The 13 unique 3D direction offsets at distance 1 (half of the 26
/// neighbourhood; the other half are their negations).
inline const std::array<std::array<int, 3>, 13>& texture_directions() {
  static const std::array<std::array<int, 3>, 13> dirs = {{{1, 0, 0},
                                                           {0, 1, 0},
                                                           {0, 0, 1},
                                                           {1, 1, 0},
                                                           {1, -1, 0},
                                                           {1, 0, 1},
                                                           {1, 0, -1},
                                                           {0, 1, 1},
                                                           {0, 1, -1},
                                                           {1, 1, 1},
                                                           {1, 1, -1},
                                                           {1, -1, 1},
                                                           {1, -1, -1}}};
  return dirs;
}

namespace detail {

struct RoiView {
  const DiscretizedGrid* disc;
  std::vector<std::size_t> voxels;        // linear indices of in-ROI voxels
  std::vector<std::array<int, 3>> coords;  // (x, y, z) per ROI voxel
  int ng = 0;                              // gray levels 1..ng

  int bin(std::size_t linear) const { return disc->bins[linear]; }
};

inline RoiView make_roi_view(const DiscretizedGrid& disc) {
  RoiView v;
  v.disc = &disc;
  v.ng = disc.n_bins;
  v.voxels.reserve(1024);
  v.coords.reserve(1024);
  const Dims d = disc.dims;
  std::size_t lin = 0;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x, ++lin)
        if (disc.bins[lin] > 0) {
          v.voxels.push_back(lin);
          v.coords.push_back({x, y, z});
        }
  if (v.voxels.empty()) throw validation_error("texture: empty mask");
  return v;
}

inline double xlog2x(double p) { return p > 0 ? p * std::log2(p) : 0.0; }

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, descending.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i * n + j)]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += std::abs(at(i, j));
    if (off < 1e-14) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(at(p, q)) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = at(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// GLCM: 13 direction offsets, per-direction symmetric matrices summed
// ("merged directions"), then normalized to sum 1.
// ---------------------------------------------------------------------------

struct Glcm {
  int ng = 0;
  std::vector<double> p;  // ng x ng, normalized

  double at(int i, int j) const { return p[static_cast<std::size_t>((i - 1) * ng + (j - 1))]; }
};

inline Glcm glcm_matrix_view(const DiscretizedGrid& disc, const detail::RoiView& roi) {
  const Dims d = disc.dims;
  Glcm m;
  m.ng = roi.ng;
  m.p.assign(static_cast<std::size_t>(m.ng) * static_cast<std::size_t>(m.ng), 0.0);
  double total = 0;
  for (std::size_t k = 0; k < roi.voxels.size(); ++k) {
    const std::size_t lin = roi.voxels[k];
    const int x = roi.coords[k][0], y = roi.coords[k][1], z = roi.coords[k][2];
    const int bi = disc.bins[lin];
    for (const auto& dir : texture_directions()) {
      const int nx = x + dir[0], ny = y + dir[1], nz = z + dir[2];
      if (nx < 0 || ny < 0 || nz < 0 || nx >= d.nx || ny >= d.ny || nz >= d.nz) continue;
      const int bj = disc.at(nx, ny, nz);
      if (bj == 0) continue;  // neighbours outside the ROI are excluded
      m.p[static_cast<std::size_t>((bi - 1) * m.ng + (bj - 1))] += 1.0;
      m.p[static_cast<std::size_t>((bj - 1) * m.ng + (bi - 1))] += 1.0;
      total += 2.0;
    }
  }
  if (total > 0)
    for (auto& v : m.p) v /= total;
  return m;
}

inline Glcm glcm_matrix(const DiscretizedGrid& disc) {
  return glcm_matrix_view(disc, detail::make_roi_view(disc));
}

inline std::map<std::string, double> glcm_features(const Glcm& m) {
  const int ng = m.ng;
  std::vector<double> px(static_cast<std::size_t>(ng), 0.0);
  std::vector<double> psum(static_cast<std::size_t>(2 * ng + 1), 0.0);   // p_{x+y}(k), k=2..2ng
  std::vector<double> pdiff(static_cast<std::size_t>(ng), 0.0);          // p_{x-y}(k), k=0..ng-1
  double mu = 0;
  for (int i = 1; i <= ng; ++i)
    for (int j = 1; j <= ng; ++j) {
      const double p = m.at(i, j);
      px[static_cast<std::size_t>(i - 1)] += p;
      psum[static_cast<std::size_t>(i + j)] += p;
      pdiff[static_cast<std::size_t>(std::abs(i - j))] += p;
      mu += p * i;
    }
  double sigma2 = 0;
  for (int i = 1; i <= ng; ++i)
    sigma2 += px[static_cast<std::size_t>(i - 1)] * (i - mu) * (i - mu);

  double autocorr = 0, contrast = 0, cluster_p = 0, cluster_s = 0, cluster_t = 0;
  double joint_energy = 0, joint_entropy = 0, max_prob = 0, corr_num = 0;
  double hxy1 = 0, hxy2 = 0, inv_var = 0, idmn = 0, idn = 0;
  for (int i = 1; i <= ng; ++i)
    for (int j = 1; j <= ng; ++j) {
      const double p = m.at(i, j);
      const double s = i + j - 2 * mu;
      autocorr += p * i * j;
      contrast += p * (i - j) * (i - j);
      cluster_p += p * s * s * s * s;
      cluster_s += p * s * s * s;
      cluster_t += p * s * s;
      joint_energy += p * p;
      joint_entropy -= detail::xlog2x(p);
      max_prob = std::max(max_prob, p);
      corr_num += p * (i - mu) * (j - mu);
      const double pipj = px[static_cast<std::size_t>(i - 1)] * px[static_cast<std::size_t>(j - 1)];
      if (p > 0 && pipj > 0) hxy1 -= p * std::log2(pipj);
      if (pipj > 0) hxy2 -= pipj * std::log2(pipj);
      if (i != j) inv_var += p / ((i - j) * (i - j));
      idmn += p / (1.0 + static_cast<double>((i - j) * (i - j)) / (static_cast<double>(ng) * ng));
      idn += p / (1.0 + static_cast<double>(std::abs(i - j)) / ng);
    }

  double hx = 0;
  for (int i = 1; i <= ng; ++i) hx -= detail::xlog2x(px[static_cast<std::size_t>(i - 1)]);

  double diff_avg = 0, diff_entropy = 0;
  for (int k = 0; k < ng; ++k) {
    const double p = pdiff[static_cast<std::size_t>(k)];
    diff_avg += k * p;
    diff_entropy -= detail::xlog2x(p);
  }
  double diff_var = 0;
  for (int k = 0; k < ng; ++k) diff_var += pdiff[static_cast<std::size_t>(k)] * (k - diff_avg) * (k - diff_avg);

  double sum_entropy = 0;
  for (int k = 2; k <= 2 * ng; ++k) sum_entropy -= detail::xlog2x(psum[static_cast<std::size_t>(k)]);

  double sum_squares = 0;
  for (int i = 1; i <= ng; ++i)
    for (int j = 1; j <= ng; ++j) sum_squares += m.at(i, j) * (i - mu) * (i - mu);

  // MCC: sqrt of the second-largest eigenvalue of Q; computed on the
  // symmetric similarity transform S*S^T with S = D^-1/2 P D^-1/2 over
  // occupied levels (px == py by symmetry).
  double mcc = kNaN;
  {
    std::vector<int> occ;
    for (int i = 1; i <= ng; ++i)
      if (px[static_cast<std::size_t>(i - 1)] > 0) occ.push_back(i);
    const int n = static_cast<int>(occ.size());
    if (n >= 2) {
      std::vector<double> s(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          s[static_cast<std::size_t>(a * n + b)] =
              m.at(occ[static_cast<std::size_t>(a)], occ[static_cast<std::size_t>(b)]) /
              std::sqrt(px[static_cast<std::size_t>(occ[static_cast<std::size_t>(a)] - 1)] *
                        px[static_cast<std::size_t>(occ[static_cast<std::size_t>(b)] - 1)]);
      std::vector<double> b(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = 0;
          for (int k = 0; k < n; ++k)
            acc += s[static_cast<std::size_t>(i * n + k)] * s[static_cast<std::size_t>(j * n + k)];
          b[static_cast<std::size_t>(i * n + j)] = acc;
        }
      const auto ev = detail::symmetric_eigenvalues(std::move(b), n);
      mcc = std::sqrt(std::max(0.0, ev[1]));
    }
  }

  std::map<std::string, double> out;
  out["Autocorrelation"] = autocorr;
  out["JointAverage"] = mu;
  out["ClusterProminence"] = cluster_p;
  out["ClusterShade"] = cluster_s;
  out["ClusterTendency"] = cluster_t;
  out["Contrast"] = contrast;
  out["Correlation"] = sigma2 > 0 ? corr_num / sigma2 : kNaN;
  out["DifferenceAverage"] = diff_avg;
  out["DifferenceEntropy"] = diff_entropy;
  out["DifferenceVariance"] = diff_var;
  out["JointEnergy"] = joint_energy;
  out["JointEntropy"] = joint_entropy;
  out["Imc1"] = hx > 0 ? (joint_entropy - hxy1) / hx : kNaN;
  out["Imc2"] = hxy2 >= joint_entropy ? std::sqrt(1.0 - std::exp(-2.0 * (hxy2 - joint_entropy))) : 0.0;
  out["Mcc"] = mcc;
  out["Idmn"] = idmn;
  out["Idn"] = idn;
  out["InverseVariance"] = inv_var;
  out["MaximumProbability"] = max_prob;
  out["SumEntropy"] = sum_entropy;
  out["SumSquares"] = sum_squares;
  return out;
}

// ---------------------------------------------------------------------------
// GLRLM: maximal equal-level runs along the 13 directions, matrices summed.
// ---------------------------------------------------------------------------

struct Glrlm {
  int ng = 0;
  int max_len = 0;
  std::vector<double> r;  // ng x max_len, raw counts

  double at(int i, int l) const { return r[static_cast<std::size_t>((i - 1) * max_len + (l - 1))]; }
};

inline Glrlm glrlm_matrix_view(const DiscretizedGrid& disc, const detail::RoiView& roi) {
  const Dims d = disc.dims;
  const int max_dim = std::max({d.nx, d.ny, d.nz});
  Glrlm m;
  m.ng = roi.ng;
  m.max_len = max_dim;
  m.r.assign(static_cast<std::size_t>(m.ng) * static_cast<std::size_t>(max_dim), 0.0);

  auto bin_at = [&](int x, int y, int z) -> int {
    if (x < 0 || y < 0 || z < 0 || x >= d.nx || y >= d.ny || z >= d.nz) return 0;
    return disc.at(x, y, z);
  };

  for (const auto& dir : texture_directions()) {
    for (std::size_t k = 0; k < roi.voxels.size(); ++k) {
      const std::size_t lin = roi.voxels[k];
      const int x = roi.coords[k][0], y = roi.coords[k][1], z = roi.coords[k][2];
      const int b = disc.bins[lin];
      // run starts where the previous voxel along dir is not an equal-level ROI voxel
      if (bin_at(x - dir[0], y - dir[1], z - dir[2]) == b) continue;
      int len = 1;
      int cx = x + dir[0], cy = y + dir[1], cz = z + dir[2];
      while (bin_at(cx, cy, cz) == b) {
        ++len;
        cx += dir[0];
        cy += dir[1];
        cz += dir[2];
      }
      m.r[static_cast<std::size_t>((b - 1) * max_dim + (len - 1))] += 1.0;
    }
  }
  return m;
}

inline Glrlm glrlm_matrix(const DiscretizedGrid& disc) {
  return glrlm_matrix_view(disc, detail::make_roi_view(disc));
}

inline std::map<std::string, double> glrlm_features(const Glrlm& m, std::size_t n_voxels) {
  double nr = 0;
  for (double v : m.r) nr += v;
  std::vector<double> pg(static_cast<std::size_t>(m.ng), 0.0);
  std::vector<double> pl(static_cast<std::size_t>(m.max_len), 0.0);
  double sre = 0, lre = 0, lglre = 0, hglre = 0, srlgl = 0, srhgl = 0, lrlgl = 0, lrhgl = 0, entropy = 0;
  for (int i = 1; i <= m.ng; ++i)
    for (int l = 1; l <= m.max_len; ++l) {
      const double c = m.at(i, l);
      if (c == 0) continue;
      pg[static_cast<std::size_t>(i - 1)] += c;
      pl[static_cast<std::size_t>(l - 1)] += c;
      const double i2 = static_cast<double>(i) * i, l2 = static_cast<double>(l) * l;
      sre += c / l2;
      lre += c * l2;
      lglre += c / i2;
      hglre += c * i2;
      srlgl += c / (i2 * l2);
      srhgl += c * i2 / l2;
      lrlgl += c * l2 / i2;
      lrhgl += c * i2 * l2;
      entropy -= detail::xlog2x(c / nr);
    }
  double glnn = 0, rlnn = 0;
  for (double v : pg) glnn += v * v;
  for (double v : pl) rlnn += v * v;

  double mu_g = 0, mu_l = 0;
  for (int i = 1; i <= m.ng; ++i) mu_g += i * pg[static_cast<std::size_t>(i - 1)] / nr;
  for (int l = 1; l <= m.max_len; ++l) mu_l += l * pl[static_cast<std::size_t>(l - 1)] / nr;
  double var_g = 0, var_l = 0;
  for (int i = 1; i <= m.ng; ++i) var_g += pg[static_cast<std::size_t>(i - 1)] / nr * (i - mu_g) * (i - mu_g);
  for (int l = 1; l <= m.max_len; ++l) var_l += pl[static_cast<std::size_t>(l - 1)] / nr * (l - mu_l) * (l - mu_l);

  std::map<std::string, double> out;
  out["ShortRunEmphasis"] = sre / nr;
  out["LongRunEmphasis"] = lre / nr;
  out["GrayLevelNonUniformityNormalized"] = glnn / (nr * nr);
  out["RunLengthNonUniformityNormalized"] = rlnn / (nr * nr);
  // merged-direction normalization: every voxel yields one run per direction
  // in the all-runs-length-1 worst case
  out["RunPercentage"] = nr / (static_cast<double>(n_voxels) * static_cast<double>(texture_directions().size()));
  out["GrayLevelVariance"] = var_g;
  out["RunVariance"] = var_l;
  out["RunEntropy"] = entropy;
  out["LowGrayLevelRunEmphasis"] = lglre / nr;
  out["HighGrayLevelRunEmphasis"] = hglre / nr;
  out["ShortRunLowGrayLevelEmphasis"] = srlgl / nr;
  out["ShortRunHighGrayLevelEmphasis"] = srhgl / nr;
  out["LongRunLowGrayLevelEmphasis"] = lrlgl / nr;
  out["LongRunHighGrayLevelEmphasis"] = lrhgl / nr;
  return out;
}

// ---------------------------------------------------------------------------
// GLSZM: 26-connected equal-level zones.
// ---------------------------------------------------------------------------

struct Glszm {
  int ng = 0;
  std::vector<std::pair<int, std::size_t>> zones;  // (gray level, zone size)
};

inline Glszm glszm_matrix_view(const DiscretizedGrid& disc, const detail::RoiView& roi) {
  const Dims d = disc.dims;
  Glszm m;
  m.ng = roi.ng;
  std::vector<std::uint8_t> visited(disc.bins.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t seed : roi.voxels) {
    if (visited[seed]) continue;
    const int level = disc.bins[seed];
    std::size_t size = 0;
    stack.push_back(seed);
    visited[seed] = 1;
    while (!stack.empty()) {
      const std::size_t lin = stack.back();
      stack.pop_back();
      ++size;
      const int z = static_cast<int>(lin / (static_cast<std::size_t>(d.nx) * d.ny));
      const std::size_t rem = lin % (static_cast<std::size_t>(d.nx) * d.ny);
      const int y = static_cast<int>(rem / static_cast<std::size_t>(d.nx));
      const int x = static_cast<int>(rem % static_cast<std::size_t>(d.nx));
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const int nx = x + dx, ny = y + dy, nz = z + dz;
            if (nx < 0 || ny < 0 || nz < 0 || nx >= d.nx || ny >= d.ny || nz >= d.nz) continue;
            const std::size_t nlin = voxel_index(d, nx, ny, nz);
            if (visited[nlin] || disc.bins[nlin] != level) continue;
            visited[nlin] = 1;
            stack.push_back(nlin);
          }
    }
    m.zones.emplace_back(level, size);
  }
  return m;
}

inline Glszm glszm_matrix(const DiscretizedGrid& disc) {
  return glszm_matrix_view(disc, detail::make_roi_view(disc));
}

inline std::map<std::string, double> glszm_features(const Glszm& m, std::size_t n_voxels) {
  const double nz = static_cast<double>(m.zones.size());
  std::map<int, double> pg;
  std::map<std::size_t, double> ps;
  double sae = 0, lae = 0, lgl = 0, hgl = 0, salgl = 0, sahgl = 0, lalgl = 0, lahgl = 0, entropy = 0;
  for (const auto& [g, s] : m.zones) {
    pg[g] += 1.0;
    ps[s] += 1.0;
    const double g2 = static_cast<double>(g) * g;
    const double s2 = static_cast<double>(s) * static_cast<double>(s);
    sae += 1.0 / s2;
    lae += s2;
    lgl += 1.0 / g2;
    hgl += g2;
    salgl += 1.0 / (g2 * s2);
    sahgl += g2 / s2;
    lalgl += s2 / g2;
    lahgl += g2 * s2;
  }
  double glnn = 0, sznn = 0;
  for (const auto& [g, c] : pg) glnn += c * c;
  for (const auto& [s, c] : ps) sznn += c * c;
  // entropy over the joint (level, size) histogram
  std::map<std::pair<int, std::size_t>, double> joint;
  for (const auto& zs : m.zones) joint[zs] += 1.0;
  for (const auto& [k, c] : joint) entropy -= detail::xlog2x(c / nz);

  double mu_g = 0, mu_s = 0;
  for (const auto& [g, c] : pg) mu_g += g * c / nz;
  for (const auto& [s, c] : ps) mu_s += static_cast<double>(s) * c / nz;
  double var_g = 0, var_s = 0;
  for (const auto& [g, c] : pg) var_g += c / nz * (g - mu_g) * (g - mu_g);
  for (const auto& [s, c] : ps) var_s += c / nz * (static_cast<double>(s) - mu_s) * (static_cast<double>(s) - mu_s);

  std::map<std::string, double> out;
  out["SmallAreaEmphasis"] = sae / nz;
  out["LargeAreaEmphasis"] = lae / nz;
  out["GrayLevelNonUniformityNormalized"] = glnn / (nz * nz);
  out["SizeZoneNonUniformityNormalized"] = sznn / (nz * nz);
  out["ZonePercentage"] = nz / static_cast<double>(n_voxels);
  out["GrayLevelVariance"] = var_g;
  out["ZoneVariance"] = var_s;
  out["ZoneEntropy"] = entropy;
  out["LowGrayLevelZoneEmphasis"] = lgl / nz;
  out["HighGrayLevelZoneEmphasis"] = hgl / nz;
  out["SmallAreaLowGrayLevelEmphasis"] = salgl / nz;
  out["SmallAreaHighGrayLevelEmphasis"] = sahgl / nz;
  out["LargeAreaLowGrayLevelEmphasis"] = lalgl / nz;
  out["LargeAreaHighGrayLevelEmphasis"] = lahgl / nz;
  return out;
}

// ---------------------------------------------------------------------------
// GLDM: 26-neighbourhood dependence, similarity tolerance alpha = 0.
// Dependence size = 1 + number of in-ROI neighbours with equal level, so the
// smallest dependence is 1 (the voxel itself).
// ---------------------------------------------------------------------------

struct Gldm {
  int ng = 0;
  int max_dep = 27;
  std::vector<double> d;  // ng x max_dep counts

  double at(int i, int j) const { return d[static_cast<std::size_t>((i - 1) * max_dep + (j - 1))]; }
};

// ---------------------------------------------------------------------------
// NGTDM: per-level counts n_i, probabilities p_i and summed absolute
// differences s_i from the 26-neighbourhood in-ROI mean. Voxels with no
// in-ROI neighbour are excluded.
// ---------------------------------------------------------------------------

struct Ngtdm {
  int ng = 0;
  std::vector<double> n, s;  // indexed 0..ng-1
  double n_valid = 0;
};

inline void gldm_ngtdm_matrices_view(const DiscretizedGrid& disc, const detail::RoiView& roi, Gldm& gldm,
                                     Ngtdm& ngtdm) {
  const Dims d = disc.dims;
  gldm.ng = roi.ng;
  gldm.max_dep = 27;
  gldm.d.assign(static_cast<std::size_t>(gldm.ng) * 27, 0.0);
  ngtdm.ng = roi.ng;
  ngtdm.n.assign(static_cast<std::size_t>(roi.ng), 0.0);
  ngtdm.s.assign(static_cast<std::size_t>(roi.ng), 0.0);
  ngtdm.n_valid = 0;

  for (std::size_t k = 0; k < roi.voxels.size(); ++k) {
    const std::size_t lin = roi.voxels[k];
    const int x = roi.coords[k][0], y = roi.coords[k][1], z = roi.coords[k][2];
    const int b = disc.bins[lin];
    int equal_neighbours = 0;
    int roi_neighbours = 0;
    double neighbour_sum = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const int nx = x + dx, ny = y + dy, nz = z + dz;
          if (nx < 0 || ny < 0 || nz < 0 || nx >= d.nx || ny >= d.ny || nz >= d.nz) continue;
          const int nb = disc.at(nx, ny, nz);
          if (nb == 0) continue;
          ++roi_neighbours;
          neighbour_sum += nb;
          if (nb == b) ++equal_neighbours;
        }
    gldm.d[static_cast<std::size_t>((b - 1) * 27 + equal_neighbours)] += 1.0;
    if (roi_neighbours > 0) {
      ngtdm.n[static_cast<std::size_t>(b - 1)] += 1.0;
      ngtdm.s[static_cast<std::size_t>(b - 1)] += std::abs(b - neighbour_sum / roi_neighbours);
      ngtdm.n_valid += 1.0;
    }
  }
}

inline void gldm_ngtdm_matrices(const DiscretizedGrid& disc, Gldm& gldm, Ngtdm& ngtdm) {
  gldm_ngtdm_matrices_view(disc, detail::make_roi_view(disc), gldm, ngtdm);
}

inline std::map<std::string, double> gldm_features(const Gldm& m) {
  double nz = 0;
  for (double v : m.d) nz += v;
  std::vector<double> pg(static_cast<std::size_t>(m.ng), 0.0);
  std::vector<double> pd(static_cast<std::size_t>(m.max_dep), 0.0);
  double sde = 0, lde = 0, lgl = 0, hgl = 0, sdlgl = 0, sdhgl = 0, ldlgl = 0, ldhgl = 0, entropy = 0;
  for (int i = 1; i <= m.ng; ++i)
    for (int j = 1; j <= m.max_dep; ++j) {
      const double c = m.at(i, j);
      if (c == 0) continue;
      pg[static_cast<std::size_t>(i - 1)] += c;
      pd[static_cast<std::size_t>(j - 1)] += c;
      const double i2 = static_cast<double>(i) * i, j2 = static_cast<double>(j) * j;
      sde += c / j2;
      lde += c * j2;
      lgl += c / i2;
      hgl += c * i2;
      sdlgl += c / (i2 * j2);
      sdhgl += c * i2 / j2;
      ldlgl += c * j2 / i2;
      ldhgl += c * i2 * j2;
      entropy -= detail::xlog2x(c / nz);
    }
  double gln = 0, dnn = 0;
  for (double v : pg) gln += v * v;
  for (double v : pd) dnn += v * v;
  double mu_g = 0, mu_d = 0;
  for (int i = 1; i <= m.ng; ++i) mu_g += i * pg[static_cast<std::size_t>(i - 1)] / nz;
  for (int j = 1; j <= m.max_dep; ++j) mu_d += j * pd[static_cast<std::size_t>(j - 1)] / nz;
  double var_g = 0, var_d = 0;
  for (int i = 1; i <= m.ng; ++i) var_g += pg[static_cast<std::size_t>(i - 1)] / nz * (i - mu_g) * (i - mu_g);
  for (int j = 1; j <= m.max_dep; ++j) var_d += pd[static_cast<std::size_t>(j - 1)] / nz * (j - mu_d) * (j - mu_d);

  std::map<std::string, double> out;
  out["SmallDependenceEmphasis"] = sde / nz;
  out["LargeDependenceEmphasis"] = lde / nz;
  out["GrayLevelNonUniformity"] = gln / nz;
  out["DependenceNonUniformityNormalized"] = dnn / (nz * nz);
  out["GrayLevelVariance"] = var_g;
  out["DependenceVariance"] = var_d;
  out["DependenceEntropy"] = entropy;
  out["LowGrayLevelEmphasis"] = lgl / nz;
  out["HighGrayLevelEmphasis"] = hgl / nz;
  out["SmallDependenceLowGrayLevelEmphasis"] = sdlgl / nz;
  out["SmallDependenceHighGrayLevelEmphasis"] = sdhgl / nz;
  out["LargeDependenceLowGrayLevelEmphasis"] = ldlgl / nz;
  out["LargeDependenceHighGrayLevelEmphasis"] = ldhgl / nz;
  return out;
}

inline std::map<std::string, double> ngtdm_features(const Ngtdm& m) {
  const double nvp = m.n_valid;
  std::map<std::string, double> out;
  if (nvp == 0) {
    for (const char* k : {"Coarseness", "Contrast", "Busyness", "Complexity", "Strength"}) out[k] = kNaN;
    return out;
  }
  int ngp = 0;
  double sum_ps = 0, s_total = 0;
  for (int i = 1; i <= m.ng; ++i) {
    const double p = m.n[static_cast<std::size_t>(i - 1)] / nvp;
    if (p > 0) ++ngp;
    sum_ps += p * m.s[static_cast<std::size_t>(i - 1)];
    s_total += m.s[static_cast<std::size_t>(i - 1)];
  }

  double contrast_pp = 0, busy_den = 0, complexity = 0, strength_num = 0;
  for (int i = 1; i <= m.ng; ++i) {
    const double pi = m.n[static_cast<std::size_t>(i - 1)] / nvp;
    if (pi == 0) continue;
    for (int j = 1; j <= m.ng; ++j) {
      const double pj = m.n[static_cast<std::size_t>(j - 1)] / nvp;
      if (pj == 0) continue;
      const double dij = static_cast<double>(i - j);
      contrast_pp += pi * pj * dij * dij;
      busy_den += std::abs(i * pi - j * pj);
      complexity += std::abs(dij) * (pi * m.s[static_cast<std::size_t>(i - 1)] + pj * m.s[static_cast<std::size_t>(j - 1)]) / (pi + pj);
      strength_num += (pi + pj) * dij * dij;
    }
  }

  out["Coarseness"] = sum_ps > 0 ? 1.0 / sum_ps : kNaN;
  out["Contrast"] = ngp > 1 ? contrast_pp / (static_cast<double>(ngp) * (ngp - 1)) * (s_total / nvp) : kNaN;
  out["Busyness"] = busy_den > 0 ? sum_ps / busy_den : kNaN;
  out["Complexity"] = complexity / nvp;
  out["Strength"] = s_total > 0 ? strength_num / s_total : kNaN;
  return out;
}

/// All five texture families from one discretized ROI; the ROI scan is
/// shared across families.
inline std::map<std::string, std::map<std::string, double>> texture_features(const DiscretizedGrid& disc) {
  const auto roi = detail::make_roi_view(disc);
  const std::size_t n_vox = roi.voxels.size();
  std::map<std::string, std::map<std::string, double>> out;
  out["glcm"] = glcm_features(glcm_matrix_view(disc, roi));
  out["glrlm"] = glrlm_features(glrlm_matrix_view(disc, roi), n_vox);
  out["glszm"] = glszm_features(glszm_matrix_view(disc, roi), n_vox);
  Gldm gldm;
  Ngtdm ngtdm;
  gldm_ngtdm_matrices_view(disc, roi, gldm, ngtdm);
  out["gldm"] = gldm_features(gldm);
  out["ngtdm"] = ngtdm_features(ngtdm);
  return out;
}

}  // namespace radstack
