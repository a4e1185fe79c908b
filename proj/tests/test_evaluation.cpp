#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "radstack/metrics.hpp"
#include "radstack/segmetrics.hpp"

using namespace radstack;

TEST_CASE("roc_auc midrank basics") {
  REQUIRE(roc_auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}).auc == 1.0);
  REQUIRE(roc_auc({1, 1}, {0, 1}).auc == 0.5);
  REQUIRE_THROWS_AS(roc_auc({1, 2}, {1, 1}), validation_error);
}

TEST_CASE("roc_auc equals pair counting exactly on tied random data") {
  Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 50 + static_cast<std::size_t>(rng.next_below(200));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.next_below(12));  // heavy ties
      labels[i] = rng.next_double() < 0.4 ? 1 : 0;
      pos |= labels[i] == 1;
      neg |= labels[i] == 0;
    }
    if (!pos) labels[0] = 1;
    if (!neg) labels[1] = 0;
    REQUIRE(roc_auc(scores, labels).auc == oracle::pair_count_auc(scores, labels));
  }
}

TEST_CASE("roc_auc symmetry and monotone-transform invariance") {
  Rng rng(72);
  std::vector<double> scores(80);
  std::vector<int> labels(80);
  for (std::size_t i = 0; i < 80; ++i) {
    scores[i] = rng.next_gauss();
    labels[i] = i % 2 ? 1 : 0;
  }
  std::vector<double> neg(80), warped(80);
  for (std::size_t i = 0; i < 80; ++i) {
    neg[i] = -scores[i];
    warped[i] = std::exp(3.0 * scores[i]) + 5.0;
  }
  REQUIRE(roc_auc(scores, labels).auc + roc_auc(neg, labels).auc == 1.0);
  REQUIRE(roc_auc(warped, labels).auc == roc_auc(scores, labels).auc);
}

TEST_CASE("macro_ovr_auc averages defined per-class aucs") {
  // 3 classes; class 2 absent from labels -> its OVR AUC is NaN and skipped
  std::vector<double> probs = {
      0.8, 0.1, 0.1,  //
      0.6, 0.3, 0.1,  //
      0.2, 0.7, 0.1,  //
      0.3, 0.6, 0.1,  //
  };
  std::vector<int> labels = {0, 0, 1, 1};
  const auto r = macro_ovr_auc(probs, 4, 3, labels);
  REQUIRE(r.per_class_auc[0] == 1.0);
  REQUIRE(r.per_class_auc[1] == 1.0);
  REQUIRE(std::isnan(r.per_class_auc[2]));
  REQUIRE(r.degenerate_class);
  REQUIRE(r.auc == 1.0);
}

TEST_CASE("delong identical models and antisymmetry") {
  Rng rng(73);
  std::vector<double> s(60);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    s[i] = rng.next_gauss() + (i % 2) * 0.8;
    y[i] = static_cast<int>(i % 2);
  }
  const auto same = delong_test(s, s, y);
  REQUIRE(same.z == 0.0);
  REQUIRE(same.p == 1.0);

  std::vector<double> s2(60);
  for (std::size_t i = 0; i < 60; ++i) s2[i] = rng.next_gauss() + (i % 2) * 0.4;
  const auto ab = delong_test(s, s2, y);
  const auto ba = delong_test(s2, s, y);
  REQUIRE(ab.z == Catch::Approx(-ba.z).margin(1e-12));
  REQUIRE(ab.p == Catch::Approx(ba.p).margin(1e-12));
}

TEST_CASE("fast delong variance matches the naive structural oracle") {
  Rng rng(74);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 60;
    std::vector<double> sa(n), sb(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      sa[i] = static_cast<double>(rng.next_below(8)) + (i % 2) * 1.5;  // ties exercised
      sb[i] = rng.next_gauss() + (i % 2) * 0.5;
    }
    const auto fast = delong_test(sa, sb, y);
    const auto naive = oracle::naive_delong(sa, sb, y);
    REQUIRE(fast.auc_a == Catch::Approx(naive.auc_a).margin(1e-12));
    REQUIRE(fast.auc_b == Catch::Approx(naive.auc_b).margin(1e-12));
    REQUIRE(fast.var_a == Catch::Approx(naive.var_a).margin(1e-10));
    REQUIRE(fast.var_b == Catch::Approx(naive.var_b).margin(1e-10));
    REQUIRE(fast.cov_ab == Catch::Approx(naive.cov_ab).margin(1e-10));
  }
}

TEST_CASE("rsd reproduces the published rows") {
  // OS task, no stability filtering, across the eight segmentation schemes
  const std::vector<double> mrmr_row = {0.48, 0.57, 0.46, 0.56, 0.59, 0.59, 0.65, 0.53};
  const std::vector<double> rfe_row = {0.42, 0.43, 0.41, 0.49, 0.52, 0.51, 0.54, 0.47};
  REQUIRE(rsd(mrmr_row) == Catch::Approx(11.2).margin(0.1));
  REQUIRE(rsd(rfe_row) == Catch::Approx(10.4).margin(0.1));
  REQUIRE(rsd({5, 5, 5, 5}) == 0.0);
  REQUIRE_THROWS_AS(rsd({-1, 1}), validation_error);
}

namespace {

RegionMask box_mask(Dims d, Spacing sp, int x0, int x1, int y0, int y1, int z0, int z1) {
  RegionMask m{d, sp, RegionId::WT, std::vector<std::uint8_t>(d.count(), 0)};
  for (int z = z0; z < z1; ++z)
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) m.voxels[voxel_index(d, x, y, z)] = 1;
  return m;
}

}  // namespace

TEST_CASE("dsc and hd95 basics") {
  const Dims d{24, 24, 24};
  const Spacing sp{1, 1, 1};
  const auto a = box_mask(d, sp, 2, 22, 2, 22, 2, 22);
  REQUIRE(dsc(a, a) == 1.0);
  REQUIRE(hd95(a, a) == 0.0);

  // disjoint single voxels 10 mm apart along x
  auto p = box_mask(d, sp, 2, 3, 5, 6, 5, 6);
  auto q = box_mask(d, sp, 12, 13, 5, 6, 5, 6);
  REQUIRE(dsc(p, q) == 0.0);
  REQUIRE(hd95(p, q) == Catch::Approx(10.0));

  // 20-cube against itself shifted one voxel
  const auto b = box_mask(d, sp, 3, 23, 2, 22, 2, 22);
  REQUIRE(dsc(a, b) == Catch::Approx(0.95));
  REQUIRE(hd95(a, b) == Catch::Approx(1.0));

  // symmetry
  REQUIRE(dsc(a, b) == dsc(b, a));
  REQUIRE(hd95(a, b) == hd95(b, a));

  // empty-mask conventions
  const auto empty = box_mask(d, sp, 0, 0, 0, 0, 0, 0);
  REQUIRE(dsc(empty, empty) == 1.0);
  REQUIRE(hd95(empty, empty) == 0.0);
  REQUIRE(dsc(a, empty) == 0.0);
  REQUIRE(hd95(a, empty) == Catch::Approx(std::sqrt(3.0 * 24.0 * 24.0)));

  auto other_geom = box_mask({12, 12, 12}, sp, 0, 2, 0, 2, 0, 2);
  REQUIRE_THROWS_AS(dsc(a, other_geom), validation_error);
}

TEST_CASE("frs ranking on a hand-built two-subject table") {
  // methods A, B, C; metric cells built so cumulative ranks are hand-checkable
  std::vector<MetricCell> cells;
  auto cell = [&](const char* subj, const char* region, const char* metric, double a, double b, double c) {
    MetricCell m;
    m.subject = subj;
    m.region = region;
    m.metric = metric;
    m.per_method = {{"A", a}, {"B", b}, {"C", c}};
    cells.push_back(m);
  };
  // DSC: higher wins; HD95: lower wins
  cell("s1", "WT", "DSC", 0.9, 0.8, 0.7);   // ranks A1 B2 C3
  cell("s1", "WT", "HD95", 1.0, 2.0, 3.0);  // ranks A1 B2 C3
  cell("s2", "WT", "DSC", 0.7, 0.9, 0.9);   // ranks A3 B1.5 C1.5
  cell("s2", "WT", "HD95", 2.0, 2.0, 1.0);  // ranks A2.5 B2.5 C1

  const auto table = frs_rank(cells, {"A", "B", "C"});
  REQUIRE(table.cumulative_rank.at("A") == Catch::Approx((1 + 1 + 3 + 2.5) / 4.0));
  REQUIRE(table.cumulative_rank.at("B") == Catch::Approx((2 + 2 + 1.5 + 2.5) / 4.0));
  REQUIRE(table.cumulative_rank.at("C") == Catch::Approx((3 + 3 + 1.5 + 1) / 4.0));
  REQUIRE(table.frs.at("A") == 1);
  REQUIRE(table.frs.at("B") == 2);
  REQUIRE(table.frs.at("C") == 3);
}

TEST_CASE("perm_test separates dominance from ties") {
  // strict dominance of A over B on every cell across 12 subjects
  std::vector<MetricCell> cells;
  for (int s = 0; s < 12; ++s) {
    MetricCell m;
    m.subject = "s" + std::to_string(s);
    m.region = "WT";
    m.metric = "DSC";
    m.per_method = {{"A", 0.9}, {"B", 0.5}};
    cells.push_back(m);
  }
  auto table = frs_rank(cells, {"A", "B"});
  REQUIRE(perm_test(table, "A", "B", 4000, 1) <= 0.01);

  // identical metrics tie every cell: p stays ~1
  for (auto& c : cells) c.per_method["B"] = 0.9;
  table = frs_rank(cells, {"A", "B"});
  REQUIRE(perm_test(table, "A", "B", 4000, 1) == Catch::Approx(1.0));
}

TEST_CASE("perm_test null p-values are approximately uniform") {
  // Random metric tables over eight exchangeable methods (the ranking uses
  // eight segmentation schemes); the pairwise p-value is approximately
  // uniform once the rank-difference statistic has rich support. 1000 tables
  // rather than 200 keep the empirical-CDF noise floor (~0.86/sqrt(n))
  // below the asserted 0.05 bound.
  Rng rng(75);
  std::vector<std::string> methods;
  for (int m = 0; m < 8; ++m) methods.push_back("M" + std::to_string(m));
  std::vector<double> pvals;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<MetricCell> cells;
    for (int s = 0; s < 12; ++s)
      for (const char* region : {"WT", "TC", "ENC"})
        for (const char* metric : {"DSC", "HD95"}) {
          MetricCell m;
          m.subject = "s" + std::to_string(s);
          m.region = region;
          m.metric = metric;
          for (const auto& name : methods) m.per_method[name] = rng.next_double();
          cells.push_back(m);
        }
    const auto table = frs_rank(cells, methods);
    pvals.push_back(perm_test(table, "M0", "M1", 999, 1000 + static_cast<std::uint64_t>(rep)));
  }
  std::sort(pvals.begin(), pvals.end());
  double ks = 0;
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    const double ecdf_hi = static_cast<double>(i + 1) / static_cast<double>(pvals.size());
    const double ecdf_lo = static_cast<double>(i) / static_cast<double>(pvals.size());
    ks = std::max({ks, std::abs(ecdf_hi - pvals[i]), std::abs(pvals[i] - ecdf_lo)});
  }
  REQUIRE(ks <= 0.05);
}
