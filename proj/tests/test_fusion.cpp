#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "radstack/segmetrics.hpp"
#include "radstack/staple.hpp"

using namespace radstack;

namespace {

RegionMask sphere_mask(Dims d, double cx, double cy, double cz, double r) {
  RegionMask m{d, {1, 1, 1}, RegionId::WT, std::vector<std::uint8_t>(d.count(), 0)};
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) + (z - cz) * (z - cz) <= r * r)
          m.voxels[voxel_index(d, x, y, z)] = 1;
  return m;
}

RegionMask degrade(const RegionMask& truth, double p, double q, Rng& rng) {
  RegionMask m = truth;
  for (auto& v : m.voxels) {
    if (v)
      v = rng.next_double() < p ? 1 : 0;  // sensitivity p
    else
      v = rng.next_double() < q ? 0 : 1;  // specificity q
  }
  return m;
}

}  // namespace

TEST_CASE("staple unanimity is a fixed point") {
  const Dims d{10, 10, 10};
  const auto truth = sphere_mask(d, 5, 5, 5, 3.2);
  const std::vector<RegionMask> masks(5, truth);
  const auto res = staple_binary(masks);
  REQUIRE(res.converged);
  const auto consensus = res.consensus_mask(d, {1, 1, 1}, RegionId::WT);
  REQUIRE(consensus.voxels == truth.voxels);
  for (std::size_t j = 0; j < 5; ++j) {
    REQUIRE(res.sensitivity_p[j] >= 0.99);
    REQUIRE(res.specificity_q[j] >= 0.99);
  }
}

TEST_CASE("staple outvotes a dissenting inverted rater") {
  const Dims d{10, 10, 10};
  const auto truth = sphere_mask(d, 5, 5, 5, 3.0);
  RegionMask inverted = truth;
  for (auto& v : inverted.voxels) v = v ? 0 : 1;
  std::vector<RegionMask> masks(4, truth);
  masks.push_back(inverted);

  const auto res = staple_binary(masks);
  const auto consensus = res.consensus_mask(d, {1, 1, 1}, RegionId::WT);
  REQUIRE(consensus.voxels == truth.voxels);
  REQUIRE(res.sensitivity_p[4] < 0.5);

  // matches an independently written EM run to convergence
  std::vector<std::vector<std::uint8_t>> raw;
  for (const auto& m : masks) raw.push_back(m.voxels);
  const auto ref = oracle::staple_em(raw);
  for (std::size_t j = 0; j < masks.size(); ++j) {
    REQUIRE(res.sensitivity_p[j] == Catch::Approx(ref.p[j]).margin(1e-6));
    REQUIRE(res.specificity_q[j] == Catch::Approx(ref.q[j]).margin(1e-6));
  }
  // the implementation stops at max|dW| < tol, the oracle runs further; the
  // posteriors agree to the stopping tolerance scale and threshold identically
  for (std::size_t i = 0; i < res.consensus_w.size(); ++i) {
    REQUIRE(res.consensus_w[i] == Catch::Approx(ref.w[i]).margin(1e-3));
    REQUIRE((res.consensus_w[i] >= 0.5) == (ref.w[i] >= 0.5));
  }
}

TEST_CASE("staple recovers planted rater operating points") {
  const Dims d{32, 32, 32};
  const auto truth = sphere_mask(d, 16, 16, 16, 9.0);
  int ok_p = 0, ok_dsc = 0;
  const int n_seeds = 20;
  for (int seed = 0; seed < n_seeds; ++seed) {
    Rng rng(1000 + static_cast<std::uint64_t>(seed));
    std::vector<RegionMask> masks;
    for (int j = 0; j < 7; ++j) masks.push_back(degrade(truth, 0.9, 0.95, rng));
    const auto res = staple_binary(masks);
    bool all_p = true;
    for (double p : res.sensitivity_p) all_p &= std::abs(p - 0.9) <= 0.05;
    ok_p += all_p;
    const auto consensus = res.consensus_mask(d, {1, 1, 1}, RegionId::WT);
    ok_dsc += dsc(consensus, truth) >= 0.95;
  }
  REQUIRE(ok_p == n_seeds);
  REQUIRE(ok_dsc == n_seeds);
}

TEST_CASE("staple log-likelihood is non-decreasing and rater order irrelevant") {
  const Dims d{12, 12, 12};
  const auto truth = sphere_mask(d, 6, 6, 6, 4.0);
  Rng rng(77);
  std::vector<RegionMask> masks;
  for (int j = 0; j < 5; ++j) masks.push_back(degrade(truth, 0.85, 0.9, rng));
  const auto res = staple_binary(masks);
  for (std::size_t i = 1; i < res.log_likelihood.size(); ++i)
    REQUIRE(res.log_likelihood[i] >= res.log_likelihood[i - 1] - 1e-9);

  auto reordered = masks;
  std::reverse(reordered.begin(), reordered.end());
  const auto res2 = staple_binary(reordered);
  for (std::size_t j = 0; j < masks.size(); ++j)
    REQUIRE(res.sensitivity_p[j] == Catch::Approx(res2.sensitivity_p[masks.size() - 1 - j]).margin(1e-12));
  // product order changes rounding in the last ulps; the posterior and its
  // thresholding are otherwise rater-order invariant
  for (std::size_t i = 0; i < res.consensus_w.size(); ++i) {
    REQUIRE(res.consensus_w[i] == Catch::Approx(res2.consensus_w[i]).margin(1e-12));
    REQUIRE((res.consensus_w[i] >= 0.5) == (res2.consensus_w[i] >= 0.5));
  }
}

TEST_CASE("staple handles the all-empty degenerate stack") {
  const Dims d{6, 6, 6};
  RegionMask empty{d, {1, 1, 1}, RegionId::WT, std::vector<std::uint8_t>(d.count(), 0)};
  const auto res = staple_binary({empty, empty, empty});
  REQUIRE(res.degenerate);
  REQUIRE(res.converged);
  const auto consensus = res.consensus_mask(d, {1, 1, 1}, RegionId::WT);
  REQUIRE(consensus.count() == 0);
  REQUIRE(res.sensitivity_p[0] == 0.99);
}

namespace {

LabelMask nested_labels(Dims d, double r_wt, double r_tc, double r_enc) {
  LabelMask m;
  m.dims = d;
  m.spacing_mm = {1, 1, 1};
  m.labels.assign(d.count(), 0);
  const double c = d.nx / 2.0;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const double dist2 = (x - c) * (x - c) + (y - c) * (y - c) + (z - c) * (z - c);
        if (dist2 <= r_enc * r_enc) m.at(x, y, z) = 4;
        else if (dist2 <= r_tc * r_tc) m.at(x, y, z) = 1;
        else if (dist2 <= r_wt * r_wt) m.at(x, y, z) = 2;
      }
  return m;
}

}  // namespace

TEST_CASE("fuse_multiregion propagates unanimity and enforces nesting") {
  const Dims d{16, 16, 16};
  const auto labels = nested_labels(d, 6.5, 4.5, 2.5);
  const std::vector<LabelMask> stack(4, labels);
  const auto fused = fuse_multiregion(stack);
  REQUIRE(fused.fused.labels == labels.labels);

  // nesting invariant on the output regardless of input
  const auto regions = derive_regions(fused.fused);
  for (std::size_t i = 0; i < regions.wt.voxels.size(); ++i) {
    REQUIRE((regions.enc.voxels[i] == 0 || regions.tc.voxels[i] == 1));
    REQUIRE((regions.tc.voxels[i] == 0 || regions.wt.voxels[i] == 1));
  }
}

TEST_CASE("fuse_multiregion clips stray ENC consensus into TC") {
  const Dims d{14, 14, 14};
  // raters agree on WT/TC but "see" ENC far outside TC: nesting forces a clip
  LabelMask base = nested_labels(d, 5.5, 3.5, 1.5);
  std::vector<LabelMask> stack;
  for (int j = 0; j < 4; ++j) {
    LabelMask m = base;
    m.at(1, 1, 1) = 4;  // isolated ENC voxel outside the WT/TC spheres
    stack.push_back(m);
  }
  const auto fused = fuse_multiregion(stack);
  // the stray voxel is unanimous in the ENC stack AND in WT/TC stacks
  // (label 4 implies membership in all three regions), so it survives with
  // its full hierarchy rather than escaping TC
  const auto regions = derive_regions(fused.fused);
  for (std::size_t i = 0; i < regions.enc.voxels.size(); ++i)
    if (regions.enc.voxels[i]) REQUIRE(regions.tc.voxels[i] == 1);

  // a clear minority vote (1 of 4) on the stray voxel is outvoted
  std::vector<LabelMask> split;
  for (int j = 0; j < 4; ++j) {
    LabelMask m = base;
    if (j < 1) m.at(1, 1, 1) = 4;
    split.push_back(m);
  }
  const auto fused2 = fuse_multiregion(split);
  REQUIRE(fused2.fused.at(1, 1, 1) == 0);
}

TEST_CASE("fuse_multiregion settles split TC votes by the majority side") {
  const Dims d{14, 14, 14};
  const auto base = nested_labels(d, 5.5, 3.5, 1.5);
  // pick a PTE voxel adjacent to the TC sphere and flip it to NEC for 3 of 4 raters
  int px = -1, py = -1, pz = -1;
  for (int z = 0; z < d.nz && px < 0; ++z)
    for (int y = 0; y < d.ny && px < 0; ++y)
      for (int x = 0; x < d.nx && px < 0; ++x)
        if (base.at(x, y, z) == 2) {
          px = x;
          py = y;
          pz = z;
        }
  std::vector<LabelMask> stack;
  for (int j = 0; j < 4; ++j) {
    LabelMask m = base;
    if (j < 3) m.at(px, py, pz) = 1;  // majority says tumor core
    stack.push_back(m);
  }
  const auto fused = fuse_multiregion(stack);
  REQUIRE(fused.fused.at(px, py, pz) == 1);  // majority side, still inside WT
}
