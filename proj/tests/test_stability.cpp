#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "radstack/stability.hpp"

using namespace radstack;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_gauss();
  return v;
}

}  // namespace

TEST_CASE("ccc basics") {
  REQUIRE(ccc({1, 2, 3}, {1, 2, 3}) == Catch::Approx(1.0));
  REQUIRE(ccc({1, 2, 3}, {3, 2, 1}) == Catch::Approx(-1.0));
  REQUIRE(ccc({1, 2, 3}, {2, 3, 4}) == Catch::Approx(4.0 / 7.0));
  REQUIRE(std::isnan(ccc({2, 2, 2}, {2, 2, 2})));
  REQUIRE_THROWS_AS(ccc({1, 2}, {1, 2, 3}), validation_error);
}

TEST_CASE("occc reduces to ccc for two raters and is 1 on unanimity") {
  Rng rng(41);
  const auto x = random_vec(rng, 12);
  const auto y = random_vec(rng, 12);
  REQUIRE(occc({x, y}) == Catch::Approx(ccc(x, y)).margin(1e-15));
  REQUIRE(occc({x, x, x, x}) == Catch::Approx(1.0));
}

TEST_CASE("occc equals the explicit weighted average of pairwise cccs") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> stack;
    for (int j = 0; j < 3; ++j) stack.push_back(random_vec(rng, 9));
    REQUIRE(occc(stack) == Catch::Approx(oracle::direct_occc(stack)).margin(1e-12));
  }
}

TEST_CASE("occc lies between the extreme pairwise cccs") {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> stack;
    const std::size_t J = 2 + trial % 5;
    for (std::size_t j = 0; j < J; ++j) stack.push_back(random_vec(rng, 8));
    double lo = 2, hi = -2;
    for (std::size_t a = 0; a < J; ++a)
      for (std::size_t b = a + 1; b < J; ++b) {
        const double c = ccc(stack[a], stack[b]);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    const double o = occc(stack);
    REQUIRE(o >= lo - 1e-12);
    REQUIRE(o <= hi + 1e-12);
  }
}

TEST_CASE("occc is invariant to rater and subject reordering") {
  Rng rng(44);
  std::vector<std::vector<double>> stack;
  for (int j = 0; j < 4; ++j) stack.push_back(random_vec(rng, 10));
  const double base = occc(stack);

  auto shuffled = stack;
  std::swap(shuffled[0], shuffled[3]);
  std::swap(shuffled[1], shuffled[2]);
  REQUIRE(occc(shuffled) == Catch::Approx(base).margin(1e-14));

  // permute subjects consistently
  std::vector<std::size_t> perm = {7, 2, 9, 0, 4, 1, 8, 3, 6, 5};
  auto permuted = stack;
  for (std::size_t j = 0; j < stack.size(); ++j)
    for (std::size_t i = 0; i < perm.size(); ++i) permuted[j][i] = stack[j][perm[i]];
  REQUIRE(occc(permuted) == Catch::Approx(base).margin(1e-14));
}

TEST_CASE("icc21 matches the from-scratch ANOVA oracle") {
  REQUIRE(icc21({{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}}) == Catch::Approx(1.0));

  // additive offsets: strictly below 1 (absolute agreement penalty)
  Rng rng(45);
  std::vector<double> base = random_vec(rng, 40);
  std::vector<std::vector<double>> offset_stack;
  for (int j = 0; j < 3; ++j) {
    auto v = base;
    for (auto& x : v) x += 0.8 * j;
    offset_stack.push_back(std::move(v));
  }
  REQUIRE(icc21(offset_stack) < 1.0 - 1e-6);

  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> stack;
    for (int j = 0; j < 3; ++j) stack.push_back(random_vec(rng, 4));
    REQUIRE(icc21(stack) == Catch::Approx(oracle::direct_icc21(stack)).margin(1e-10));
  }
}

namespace {

RaterStack make_stack(const std::vector<FeatureMatrix>& mats) {
  RaterStack s;
  for (std::size_t i = 0; i < mats.size(); ++i) {
    s.rater_names.push_back("r" + std::to_string(i + 1));
    s.matrices.push_back(mats[i]);
  }
  return s;
}

FeatureMatrix matrix_with(const std::vector<FeatureDescriptor>& descs,
                          const std::vector<std::vector<double>>& columns) {
  FeatureMatrix m;
  m.descriptors = descs;
  const std::size_t n = columns[0].size();
  for (std::size_t i = 0; i < n; ++i) m.subject_ids.push_back("s" + std::to_string(i));
  m.values.assign(n * descs.size(), 0.0);
  for (std::size_t c = 0; c < descs.size(); ++c)
    for (std::size_t r = 0; r < n; ++r) m.at(r, c) = columns[c][r];
  return m;
}

}  // namespace

TEST_CASE("stability_filter retains by inclusive threshold and excludes noise") {
  const std::vector<FeatureDescriptor> descs = {
      parse_descriptor("WT:T1:original:firstorder:Mean"),
      parse_descriptor("ENC:T2:original:firstorder:Mean"),
      parse_descriptor("BRAIN:NONE:NONE:shape:MeshVolume"),
      parse_descriptor("NONE:NONE:NONE:clinical:Age"),
  };
  Rng rng(46);
  std::vector<double> stable(20), brain(20), age(20);
  for (std::size_t i = 0; i < 20; ++i) {
    stable[i] = rng.next_gauss();
    brain[i] = rng.next_gauss();
    age[i] = 40 + 0.5 * static_cast<double>(i);
  }

  std::vector<FeatureMatrix> mats;
  for (int j = 0; j < 7; ++j) {
    auto noisy = stable;  // feature 0 identical across raters
    std::vector<double> junk(20);
    for (auto& x : junk) x = rng.next_gauss();  // feature 1 decorrelated per rater
    mats.push_back(matrix_with(descs, {noisy, junk, brain, age}));
  }
  const auto stack = make_stack(mats);
  const auto report = stability_filter(stack, 0.95);

  // BRAIN and Age are excluded from scoring but re-attached in augmented
  REQUIRE(report.descriptors.size() == 2);
  REQUIRE(report.retained == std::vector<std::string>{descs[0].str()});
  REQUIRE(std::find(report.augmented.begin(), report.augmented.end(), descs[2].str()) != report.augmented.end());
  REQUIRE(std::find(report.augmented.begin(), report.augmented.end(), descs[3].str()) != report.augmented.end());

  // inclusive bound: a descriptor at exactly tau stays retained
  const double o = report.occc_values[0];
  const auto again = stability_filter(stack, o);
  REQUIRE(std::find(again.retained.begin(), again.retained.end(), descs[0].str()) != again.retained.end());

  REQUIRE_THROWS_AS(stability_filter(RaterStack{{"a"}, {mats[0]}}, 0.95), validation_error);
}

TEST_CASE("decorrelated rater drags down exactly the affected descriptors") {
  // six raters share both columns; rater 7 replaces column 1 with noise
  std::vector<FeatureDescriptor> descs = {parse_descriptor("WT:T1:original:firstorder:Mean"),
                                          parse_descriptor("TC:T1:original:firstorder:Mean")};
  Rng rng(47);
  std::vector<double> a(30), b(30);
  for (std::size_t i = 0; i < 30; ++i) {
    a[i] = rng.next_gauss();
    b[i] = rng.next_gauss();
  }
  std::vector<FeatureMatrix> mats;
  for (int j = 0; j < 6; ++j) mats.push_back(matrix_with(descs, {a, b}));
  std::vector<double> noise(30);
  for (auto& x : noise) x = rng.next_gauss();
  mats.push_back(matrix_with(descs, {a, noise}));

  const auto report = stability_filter(make_stack(mats), 0.95);
  REQUIRE(report.retained == std::vector<std::string>{descs[0].str()});
}

TEST_CASE("stability report serializes occc values and retained names") {
  std::vector<FeatureDescriptor> descs = {parse_descriptor("WT:T1:original:firstorder:Mean")};
  Rng rng(48);
  std::vector<double> a(10);
  for (auto& x : a) x = rng.next_gauss();
  std::vector<FeatureMatrix> mats = {matrix_with(descs, {a}), matrix_with(descs, {a})};
  const auto report = stability_filter(make_stack(mats), 0.9);
  const auto j = stability_report_to_json(report);
  REQUIRE(j["tau"] == 0.9);
  REQUIRE(j["occc"][descs[0].str()].get<double>() == Catch::Approx(1.0));
  REQUIRE(j["retained"].size() == 1);
}
