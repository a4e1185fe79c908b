#include <catch2/catch_amalgamated.hpp>

#include "radstack/tableprep.hpp"

using namespace radstack;

namespace {

FeatureMatrix one_column(const std::vector<double>& values) {
  FeatureMatrix m;
  m.descriptors = {parse_descriptor("WT:T1:original:firstorder:Mean")};
  for (std::size_t i = 0; i < values.size(); ++i) m.subject_ids.push_back("s" + std::to_string(i));
  m.values = values;
  return m;
}

}  // namespace

TEST_CASE("scaled_mad basics") {
  REQUIRE(scaled_mad({5, 5, 5, 5}) == 0.0);
  REQUIRE(scaled_mad({1, 2, 3, 4, 5}) == Catch::Approx(kMadScale).margin(1e-12));
  REQUIRE_THROWS_AS(scaled_mad({kNaN, kNaN}), validation_error);

  // consistency: scaled MAD of a large standard normal sample approaches 1
  Rng rng(9);
  std::vector<double> sample(100000);
  for (auto& x : sample) x = rng.next_gauss();
  REQUIRE(scaled_mad(sample) == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("fit_clean replaces the outlier and z-scores") {
  auto [cleaned, stats] = fit_clean(one_column({1, 1, 1, 1, 100}));
  // 100 is flagged (mad = 0), replaced by the inlier mean 1; std 0 -> zeros
  for (std::size_t r = 0; r < 5; ++r) REQUIRE(cleaned.at(r, 0) == 0.0);
  REQUIRE(stats.impute_mean[0] == 1.0);
  REQUIRE(stats.z_std[0] == 0.0);
}

TEST_CASE("fit_clean imputes NaN by the remaining mean") {
  auto [cleaned, stats] = fit_clean(one_column({2, kNaN, 4}));
  REQUIRE(stats.impute_mean[0] == Catch::Approx(3.0));
  // cleaned column is z-scored {2,3,4}: mean 3, population std sqrt(2/3)
  const double sd = std::sqrt(2.0 / 3.0);
  REQUIRE(cleaned.at(0, 0) == Catch::Approx(-1.0 / sd));
  REQUIRE(cleaned.at(1, 0) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(cleaned.at(2, 0) == Catch::Approx(1.0 / sd));
}

TEST_CASE("fit_clean z-scores an outlier-free column to mean 0 std 1") {
  Rng rng(10);
  std::vector<double> v(64);
  for (auto& x : v) x = 3.0 + 0.5 * rng.next_gauss();
  auto [cleaned, stats] = fit_clean(one_column(v));
  double m = 0, s2 = 0;
  for (std::size_t r = 0; r < 64; ++r) m += cleaned.at(r, 0) / 64.0;
  for (std::size_t r = 0; r < 64; ++r) s2 += cleaned.at(r, 0) * cleaned.at(r, 0) / 64.0;
  REQUIRE(m == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(std::sqrt(s2 - m * m) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("fit_clean re-run never re-flags the values it replaced") {
  // Exact idempotence does not hold in general: replacing outliers shrinks
  // the column MAD, so a second pass can flag previously-inlier tail values.
  // What does hold (and is asserted) is the replacement mechanism itself:
  // a replaced cell equals the inlier mean, which is never an outlier of the
  // cleaned column. The violation rate of full idempotence is frozen as a
  // seeded regression alongside.
  Rng rng(11);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    FeatureMatrix m;
    m.descriptors = {parse_descriptor("WT:T1:original:firstorder:Mean"),
                     parse_descriptor("WT:T1:original:firstorder:Variance")};
    for (int i = 0; i < 24; ++i) m.subject_ids.push_back("s" + std::to_string(i));
    m.values.resize(48);
    for (auto& x : m.values) x = rng.next_gauss() + (rng.next_double() < 0.05 ? 25.0 : 0.0);
    auto [once, stats1] = fit_clean(m);
    auto [twice, stats2] = fit_clean(once);

    bool same = true;
    for (std::size_t i = 0; i < once.values.size(); ++i)
      same &= std::abs(once.values[i] - twice.values[i]) <= 1e-9;
    violations += same ? 0 : 1;

    // cells replaced in pass 1 are never flagged again by pass 2
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::vector<double> col = m.column(c);
      const double med = median_of(col);
      const double mad = scaled_mad(col);
      std::vector<double> cleaned_col = once.column(c);
      const double med2 = median_of(cleaned_col);
      const double mad2 = scaled_mad(cleaned_col);
      for (std::size_t r = 0; r < m.rows(); ++r) {
        if (std::abs(m.at(r, c) - med) <= 3.0 * mad) continue;  // was an inlier
        const double z = stats1.z_std[c] > 0
                             ? (stats1.impute_mean[c] - stats1.z_mean[c]) / stats1.z_std[c]
                             : 0.0;
        REQUIRE(once.at(r, c) == Catch::Approx(z).margin(1e-12));
        REQUIRE(std::abs(once.at(r, c) - med2) <= 3.0 * mad2 + 1e-12);
      }
    }
  }
  REQUIRE(violations <= 40);  // seeded regression: 33/100 with this generator
}

TEST_CASE("apply_clean uses only discovery statistics") {
  auto [cleaned, stats] = fit_clean(one_column({1, 2, 3, 4, 5}));

  // all-NaN test column maps to the imputed, z-scored constant
  auto all_nan = apply_clean(one_column({kNaN, kNaN}), stats);
  const double expect = (stats.impute_mean[0] - stats.z_mean[0]) / stats.z_std[0];
  REQUIRE(all_nan.at(0, 0) == Catch::Approx(expect));
  REQUIRE(all_nan.at(1, 0) == Catch::Approx(expect));

  // test equal to discovery transforms identically
  auto same = apply_clean(one_column({1, 2, 3, 4, 5}), stats);
  for (std::size_t r = 0; r < 5; ++r) REQUIRE(same.at(r, 0) == Catch::Approx(cleaned.at(r, 0)));

  // shifted test column shifts by delta / z_std: no re-centering on test data
  auto shifted = apply_clean(one_column({2, 3, 4, 5, 6}), stats);
  for (std::size_t r = 0; r < 5; ++r)
    REQUIRE(shifted.at(r, 0) - same.at(r, 0) == Catch::Approx(1.0 / stats.z_std[0]));

  // unfitted descriptor rejected
  FeatureMatrix other;
  other.descriptors = {parse_descriptor("TC:T1:original:firstorder:Mean")};
  other.subject_ids = {"a"};
  other.values = {1.0};
  REQUIRE_THROWS_AS(apply_clean(other, stats), validation_error);
}

TEST_CASE("apply_clean commutes with row reordering") {
  auto [cleaned, stats] = fit_clean(one_column({3, 1, 4, 1, 5}));
  auto fwd = apply_clean(one_column({9, 2, 6}), stats);
  auto rev = apply_clean(one_column({6, 2, 9}), stats);
  REQUIRE(fwd.at(0, 0) == rev.at(2, 0));
  REQUIRE(fwd.at(1, 0) == rev.at(1, 0));
  REQUIRE(fwd.at(2, 0) == rev.at(0, 0));
}

TEST_CASE("mad_filter drops zero-MAD columns") {
  FeatureMatrix m;
  m.descriptors = {parse_descriptor("WT:T1:original:firstorder:Mean"),
                   parse_descriptor("WT:T1:original:firstorder:Median"),
                   parse_descriptor("WT:T1:original:firstorder:Variance")};
  m.subject_ids = {"a", "b", "c", "d", "e", "f"};
  m.values = {
      7, 0, 1,  //
      7, 0, 1,  //
      7, 0, 1,  //
      7, 1, 1,  //
      7, 1, 1,  //
      7, 1, 9,  // constant | balanced binary | constant except one
  };
  const auto keep = mad_filter(m);
  REQUIRE(keep == std::vector<std::size_t>{1});

  // an unbalanced binary column's majority value IS its median, so its
  // median absolute deviation is exactly zero and the column drops
  FeatureMatrix skewed;
  skewed.descriptors = {parse_descriptor("WT:T1:original:firstorder:Mean")};
  skewed.subject_ids = {"a", "b", "c", "d", "e"};
  skewed.values = {0, 0, 0, 1, 1};
  REQUIRE(mad_filter(skewed).empty());
  REQUIRE(scaled_mad({0, 0, 0, 1, 1}) == 0.0);
}
