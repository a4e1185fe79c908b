#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "radstack/ensemble.hpp"
#include "radstack/forest.hpp"
#include "radstack/smote.hpp"

using namespace radstack;

TEST_CASE("smote is a no-op on balanced input") {
  std::vector<double> X = {0, 0, 1, 1, 2, 2, 3, 3};
  std::vector<int> y = {0, 0, 1, 1};
  auto X2 = X;
  auto y2 = y;
  smote(X2, y2, 2, 5, 123);
  REQUIRE(X2 == X);
  REQUIRE(y2 == y);
}

TEST_CASE("smote synthetics lie on the segment with k capped at 1") {
  // minority {(0,0), (1,1)}: every synthetic point sits on the diagonal
  std::vector<double> X = {0, 0, 1, 1, 5, 5, 6, 6, 7, 7, 8, 8};
  std::vector<int> y = {1, 1, 0, 0, 0, 0};
  smote(X, y, 2, 5, 7);
  REQUIRE(y.size() == 8);
  for (std::size_t i = 6; i < 8; ++i) {
    const double a = X[i * 2], b = X[i * 2 + 1];
    REQUIRE(a == Catch::Approx(b).margin(1e-12));  // on the diagonal segment
    REQUIRE(a >= 0.0);
    REQUIRE(a <= 1.0);
  }
}

TEST_CASE("smote balances counts and stays inside the minority hull") {
  Rng rng(61);
  std::vector<double> X;
  std::vector<int> y;
  std::vector<std::array<double, 2>> minority;
  for (int i = 0; i < 45; ++i) {
    X.push_back(rng.next_gauss() + 4);
    X.push_back(rng.next_gauss() - 4);
    y.push_back(0);
  }
  for (int i = 0; i < 5; ++i) {
    const double a = rng.next_gauss(), b = rng.next_gauss();
    X.push_back(a);
    X.push_back(b);
    y.push_back(1);
    minority.push_back({a, b});
  }
  const std::size_t before = y.size();
  smote(X, y, 2, 5, 99);
  std::map<int, std::size_t> counts;
  for (int v : y) ++counts[v];
  REQUIRE(counts[0] == counts[1]);

  // balanced output class entropy equals log2(k) exactly
  double entropy = 0;
  for (const auto& [cls, cnt] : counts) {
    const double p = static_cast<double>(cnt) / static_cast<double>(y.size());
    entropy -= p * std::log2(p);
  }
  REQUIRE(entropy == Catch::Approx(1.0).margin(1e-12));

  // hull membership via the independent 2D geometric oracle
  for (std::size_t i = before; i < y.size(); ++i) {
    REQUIRE(y[i] == 1);
    REQUIRE(oracle::in_convex_hull_2d(minority, X[i * 2], X[i * 2 + 1]));
  }

  std::vector<double> Xs = {0, 0, 1, 1, 2, 2};
  std::vector<int> ys = {0, 0, 1};
  REQUIRE_THROWS_AS(smote(Xs, ys, 2, 5, 1), validation_error);
}

TEST_CASE("forest fits threshold-separable data exactly") {
  std::vector<double> X = {-2, -1.5, -1, 1, 1.5, 2};
  std::vector<int> y = {0, 0, 0, 1, 1, 1};
  ForestHyper hyper;
  hyper.n_estimators = 50;
  const auto forest = train_forest(X, y, 6, 1, hyper, 3);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto p = forest.predict_proba(&X[i]);
    REQUIRE((p[1] > 0.5) == (y[i] == 1));
  }
}

TEST_CASE("forest probabilities sum to one") {
  Rng rng(62);
  const std::size_t n = 60;
  std::vector<double> X(n * 3);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 3);
    for (std::size_t j = 0; j < 3; ++j) X[i * 3 + j] = rng.next_gauss() + y[i] * 0.3;
  }
  ForestHyper hyper;
  hyper.n_estimators = 40;
  const auto forest = train_forest(X, y, n, 3, hyper, 5);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = forest.predict_proba(&X[i * 3]);
    REQUIRE(p[0] + p[1] + p[2] == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("forest training is a seeded deterministic function") {
  Rng rng(63);
  const std::size_t n = 50;
  std::vector<double> X(n * 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    X[i * 2] = rng.next_gauss() + y[i];
    X[i * 2 + 1] = rng.next_gauss();
  }
  // duplicate every row: same seed twice gives identical predictions
  std::vector<double> Xd;
  std::vector<int> yd;
  for (std::size_t i = 0; i < n; ++i) {
    Xd.insert(Xd.end(), {X[i * 2], X[i * 2 + 1]});
    Xd.insert(Xd.end(), {X[i * 2], X[i * 2 + 1]});
    yd.push_back(y[i]);
    yd.push_back(y[i]);
  }
  ForestHyper hyper;
  hyper.n_estimators = 150;
  const auto f1 = train_forest(Xd, yd, 2 * n, 2, hyper, 11);
  const auto f2 = train_forest(Xd, yd, 2 * n, 2, hyper, 11);
  const auto forig = train_forest(X, y, n, 2, hyper, 11);
  double max_dup_shift = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = f1.predict_proba(&X[i * 2]);
    const auto b = f2.predict_proba(&X[i * 2]);
    REQUIRE(a == b);  // bit-identical regression under a fixed seed
    max_dup_shift = std::max(max_dup_shift, std::abs(a[1] - forig.predict_proba(&X[i * 2])[1]));
  }
  // duplication leaves the bootstrap distribution unchanged: predictions stay close
  REQUIRE(max_dup_shift < 0.25);

  // thread count must not change the result
  const auto ft1 = train_forest(X, y, n, 2, hyper, 11, 1);
  const auto ft2 = train_forest(X, y, n, 2, hyper, 11, 2);
  for (std::size_t i = 0; i < n; ++i)
    REQUIRE(ft1.predict_proba(&X[i * 2]) == ft2.predict_proba(&X[i * 2]));
}

TEST_CASE("forest generalizes on the two-Gaussian task near the Bayes rate") {
  // class means +-mu with unit variance; Bayes accuracy ~ Phi(mu) = 0.92
  const double mu = 1.405;
  Rng rng(64);
  auto sample = [&](std::size_t n, std::vector<double>& X, std::vector<int>& y) {
    X.resize(n * 2);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % 2);
      const double c = y[i] == 1 ? mu : -mu;
      X[i * 2] = c * 0.70710678 + rng.next_gauss();
      X[i * 2 + 1] = c * 0.70710678 + rng.next_gauss();
    }
  };
  std::vector<double> Xtr, Xte;
  std::vector<int> ytr, yte;
  sample(500, Xtr, ytr);
  sample(2000, Xte, yte);

  // Monte-Carlo Bayes-rate oracle: the optimal rule thresholds the projection
  std::size_t bayes_correct = 0;
  for (std::size_t i = 0; i < yte.size(); ++i) {
    const double proj = Xte[i * 2] + Xte[i * 2 + 1];
    bayes_correct += ((proj > 0) == (yte[i] == 1));
  }
  const double bayes = static_cast<double>(bayes_correct) / static_cast<double>(yte.size());
  REQUIRE(bayes == Catch::Approx(0.92).margin(0.02));

  ForestHyper hyper;
  const auto forest = train_forest(Xtr, ytr, 500, 2, hyper, 21);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < yte.size(); ++i) {
    const auto p = forest.predict_proba(&Xte[i * 2]);
    correct += ((p[1] > 0.5) == (yte[i] == 1));
  }
  REQUIRE(static_cast<double>(correct) / static_cast<double>(yte.size()) >= 0.85);
}

TEST_CASE("ensemble soft voting averages forest probabilities") {
  Rng rng(65);
  const std::size_t n = 40;
  std::vector<double> X(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    X[i] = y[i] * 2.0 + 0.3 * rng.next_gauss();
  }
  ForestHyper hyper;
  hyper.n_estimators = 20;
  auto model = train_ensemble(X, y, n, 1, hyper, 5, 77);
  REQUIRE(model.forests.size() == 5);

  const double probe = 1.7;
  const auto ens = ensemble_predict_row(model, &probe);
  double manual = 0;
  for (const auto& f : model.forests) manual += f.predict_proba(&probe)[1];
  manual /= 5.0;
  REQUIRE(ens[1] == Catch::Approx(manual).margin(1e-15));

  // shuffling forest order leaves the mean bit-identical
  auto shuffled = model;
  std::swap(shuffled.forests[0], shuffled.forests[4]);
  std::swap(shuffled.forests[1], shuffled.forests[3]);
  REQUIRE(ensemble_predict_row(shuffled, &probe) == ens);

  // easy data: every forest agrees on the hard label
  for (double x : {-0.5, 2.5}) {
    const auto p = ensemble_predict_row(model, &x);
    const int label = argmax_class(model, p.data());
    for (const auto& f : model.forests) {
      const auto fp = f.predict_proba(&x);
      REQUIRE(model.classes[fp[1] > fp[0] ? 1 : 0] == label);
    }
  }
}

TEST_CASE("model persistence round-trips bit-exactly and detects tampering") {
  namespace fs = std::filesystem;
  Rng rng(66);
  const std::size_t n = 30;
  std::vector<double> X(n * 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    X[i * 2] = rng.next_gauss() + y[i];
    X[i * 2 + 1] = rng.next_gauss();
  }
  ForestHyper hyper;
  hyper.n_estimators = 15;
  auto model = train_ensemble(X, y, n, 2, hyper, 4, 123);
  model.selected = {"WT:T1:original:firstorder:Mean", "WT:T1:original:firstorder:Variance"};
  model.stats.descriptors = model.selected;
  model.stats.impute_mean = {0.1, 0.2};
  model.stats.z_mean = {0.0, 0.1};
  model.stats.z_std = {1.0, 2.0};

  const auto dir = fs::temp_directory_path() / "radstack_model_test";
  fs::create_directories(dir);
  const auto path = dir / "model.bin";
  save_model(model, path);
  const auto loaded = load_model(path);
  REQUIRE(loaded.selected == model.selected);
  REQUIRE(loaded.classes == model.classes);
  REQUIRE(loaded.stats.z_std == model.stats.z_std);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = ensemble_predict_row(model, &X[i * 2]);
    const auto b = ensemble_predict_row(loaded, &X[i * 2]);
    REQUIRE(a == b);
  }

  // corrupt one payload byte: checksum must reject
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(64);
    char c;
    f.seekg(64);
    f.get(c);
    f.seekp(64);
    f.put(static_cast<char>(c ^ 0x5A));
  }
  REQUIRE_THROWS_WITH(load_model(path), Catch::Matchers::ContainsSubstring("checksum"));

  // unknown version tag
  {
    std::ofstream f(dir / "bogus.bin", std::ios::binary);
    f << "NOTAMODELxxxxxxxxxxxxxxxx";
  }
  REQUIRE_THROWS_WITH(load_model(dir / "bogus.bin"), Catch::Matchers::ContainsSubstring("version"));
}
