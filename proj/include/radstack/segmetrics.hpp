#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "radstack/common.hpp"
#include "radstack/volume.hpp"

namespace radstack {

/// Dice overlap. Both-empty is perfect agreement (1); exactly one empty is 0.
inline double dsc(const RegionMask& a, const RegionMask& b) {
  if (a.dims != b.dims || a.spacing_mm != b.spacing_mm)
    throw validation_error("dsc: geometry mismatch");
  std::size_t na = 0, nb = 0, inter = 0;
  for (std::size_t i = 0; i < a.voxels.size(); ++i) {
    na += (a.voxels[i] != 0);
    nb += (b.voxels[i] != 0);
    inter += (a.voxels[i] && b.voxels[i]);
  }
  if (na == 0 && nb == 0) return 1.0;
  if (na == 0 || nb == 0) return 0.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

namespace detail {

inline std::vector<std::array<int, 3>> boundary_voxels(const RegionMask& m) {
  const Dims d = m.dims;
  std::vector<std::array<int, 3>> out;
  auto inside = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= d.nx || y >= d.ny || z >= d.nz) return false;
    return m.at(x, y, z);
  };
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        if (!m.at(x, y, z)) continue;
        if (!inside(x - 1, y, z) || !inside(x + 1, y, z) || !inside(x, y - 1, z) ||
            !inside(x, y + 1, z) || !inside(x, y, z - 1) || !inside(x, y, z + 1))
          out.push_back({x, y, z});
      }
  return out;
}

/// For each source boundary voxel, the distance (mm) to the nearest target
/// boundary voxel; returns the 95th percentile (linear interpolation).
inline double directed_d95(const std::vector<std::array<int, 3>>& src,
                           const std::vector<std::array<int, 3>>& dst, const Spacing& sp) {
  std::vector<double> dists(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : dst) {
      const double dx = (src[i][0] - t[0]) * sp[0];
      const double dy = (src[i][1] - t[1]) * sp[1];
      const double dz = (src[i][2] - t[2]) * sp[2];
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    dists[i] = std::sqrt(best);
  }
  std::sort(dists.begin(), dists.end());
  return percentile_sorted(dists, 95.0);
}

}  // namespace detail

/// Symmetric 95th-percentile boundary distance in mm. Both masks empty -> 0;
/// exactly one empty -> the image physical diagonal (worst-case sentinel).
inline double hd95(const RegionMask& a, const RegionMask& b) {
  if (a.dims != b.dims || a.spacing_mm != b.spacing_mm)
    throw validation_error("hd95: geometry mismatch");
  const auto ba = detail::boundary_voxels(a);
  const auto bb = detail::boundary_voxels(b);
  if (ba.empty() && bb.empty()) return 0.0;
  if (ba.empty() || bb.empty()) {
    const double dx = a.dims.nx * a.spacing_mm[0];
    const double dy = a.dims.ny * a.spacing_mm[1];
    const double dz = a.dims.nz * a.spacing_mm[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return std::max(detail::directed_d95(ba, bb, a.spacing_mm), detail::directed_d95(bb, ba, a.spacing_mm));
}

// ---------------------------------------------------------------------------
// FRS ranking of segmentation methods over (subject, region, metric) cells.
// ---------------------------------------------------------------------------

struct MetricCell {
  std::string subject;
  std::string region;  // "WT"/"TC"/"ENC"
  std::string metric;  // "DSC" (higher better) or "HD95" (lower better)
  std::map<std::string, double> per_method;
};

struct RankingTable {
  std::vector<std::string> methods;
  std::map<std::string, double> cumulative_rank;  // mean per-cell rank
  std::map<std::string, int> frs;                 // ordinal rank, 1 = best
  // per-cell ranks in cell order, aligned with `methods`
  std::vector<std::vector<double>> cell_ranks;
  std::vector<MetricCell> cells;
};

/// Ranks methods 1..M per cell (DSC descending, HD95 ascending, ties get the
/// average rank), averages over cells, then assigns the ordinal FRS.
inline RankingTable frs_rank(const std::vector<MetricCell>& cells, const std::vector<std::string>& methods) {
  if (methods.size() < 2) throw validation_error("frs_rank: need at least 2 methods");
  RankingTable table;
  table.methods = methods;
  table.cells = cells;
  for (const auto& m : methods) table.cumulative_rank[m] = 0.0;

  for (const auto& cell : cells) {
    std::vector<double> value(methods.size());
    for (std::size_t i = 0; i < methods.size(); ++i) {
      auto it = cell.per_method.find(methods[i]);
      if (it == cell.per_method.end())
        throw validation_error("frs_rank: missing cell for method " + methods[i] + " at subject " +
                               cell.subject);
      // negate DSC so that "smaller is better" ranks uniformly
      value[i] = cell.metric == "DSC" ? -it->second : it->second;
    }
    std::vector<std::size_t> order(methods.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    std::vector<double> rank(methods.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && value[order[j + 1]] == value[order[i]]) ++j;
      const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
      for (std::size_t t = i; t <= j; ++t) rank[order[t]] = r;
      i = j + 1;
    }
    table.cell_ranks.push_back(rank);
    for (std::size_t k = 0; k < methods.size(); ++k) table.cumulative_rank[methods[k]] += rank[k];
  }
  if (!cells.empty())
    for (auto& [m, r] : table.cumulative_rank) r /= static_cast<double>(cells.size());

  // ordinal FRS; exact ties break by method order
  std::vector<std::size_t> order(methods.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = table.cumulative_rank.at(methods[a]);
    const double rb = table.cumulative_rank.at(methods[b]);
    return ra != rb ? ra < rb : a < b;
  });
  for (std::size_t i = 0; i < order.size(); ++i) table.frs[methods[order[i]]] = static_cast<int>(i + 1);
  return table;
}

/// Subject-level random permutation test between two methods: with
/// probability 1/2, swap all of a subject's cell ranks between A and B, then
/// recompute the cumulative-rank difference. Add-one smoothed p-value.
inline double perm_test(const RankingTable& table, const std::string& method_a, const std::string& method_b,
                        int n_perm = 100000, std::uint64_t seed = 0) {
  std::ptrdiff_t ia = -1, ib = -1;
  for (std::size_t i = 0; i < table.methods.size(); ++i) {
    if (table.methods[i] == method_a) ia = static_cast<std::ptrdiff_t>(i);
    if (table.methods[i] == method_b) ib = static_cast<std::ptrdiff_t>(i);
  }
  if (ia < 0 || ib < 0) throw validation_error("perm_test: unknown method name");

  // group cell indices by subject
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < table.cells.size(); ++i) by_subject[table.cells[i].subject].push_back(i);
  const double n_cells = static_cast<double>(table.cells.size());

  double observed = 0;
  for (std::size_t i = 0; i < table.cells.size(); ++i)
    observed += table.cell_ranks[i][static_cast<std::size_t>(ia)] - table.cell_ranks[i][static_cast<std::size_t>(ib)];
  observed /= n_cells;

  Rng rng(seed);
  int exceed = 0;
  for (int p = 0; p < n_perm; ++p) {
    double delta = 0;
    for (const auto& [subj, cell_idx] : by_subject) {
      const bool swap = (rng.next_u64() & 1) != 0;
      for (auto ci : cell_idx) {
        const double ra = table.cell_ranks[ci][static_cast<std::size_t>(ia)];
        const double rb = table.cell_ranks[ci][static_cast<std::size_t>(ib)];
        delta += swap ? rb - ra : ra - rb;
      }
    }
    delta /= n_cells;
    if (std::abs(delta) >= std::abs(observed) - 1e-15) ++exceed;
  }
  return (1.0 + exceed) / (static_cast<double>(n_perm) + 1.0);
}

}  // namespace radstack
