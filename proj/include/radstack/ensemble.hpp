#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "radstack/common.hpp"
#include "radstack/forest.hpp"
#include "radstack/matrix.hpp"
#include "radstack/tableprep.hpp"

namespace radstack {

/// 50 seeded forests plus the preprocessing statistics and selected
/// descriptors used at fit time. Prediction is the unweighted mean of the
/// per-forest probability vectors; hard labels break ties toward the lower
/// class index.
struct ForestEnsembleModel {
  std::vector<RandomForest> forests;
  std::vector<int> classes;
  std::vector<std::string> selected;  // descriptor strings, model input order
  ColumnStats stats;                  // restricted to `selected`
  ForestHyper hyper;
  std::uint64_t master_seed = 0;
};

inline ForestEnsembleModel train_ensemble(const std::vector<double>& X, const std::vector<int>& y,
                                          std::size_t n, std::size_t p, const ForestHyper& hyper,
                                          int n_forests, std::uint64_t master_seed, int threads = 1) {
  ForestEnsembleModel model;
  model.hyper = hyper;
  model.master_seed = master_seed;
  model.forests.resize(static_cast<std::size_t>(n_forests));
  parallel_for(static_cast<std::size_t>(n_forests), threads, [&](std::size_t f) {
    model.forests[f] = train_forest(X, y, n, p, hyper, mix_seed(master_seed, f), 1);
  });
  model.classes = model.forests.front().classes;
  return model;
}

inline std::vector<double> ensemble_predict_row(const ForestEnsembleModel& model, const double* x) {
  std::vector<double> acc(model.classes.size(), 0.0);
  for (const auto& forest : model.forests) {
    const auto probs = forest.predict_proba(x);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += probs[c];
  }
  const double inv = 1.0 / static_cast<double>(model.forests.size());
  for (auto& v : acc) v *= inv;
  return acc;
}

/// Row-major n x k probability table for n inputs.
inline std::vector<double> ensemble_predict(const ForestEnsembleModel& model, const std::vector<double>& X,
                                            std::size_t n, std::size_t p, int threads = 1) {
  std::vector<double> out(n * model.classes.size());
  parallel_for(n, threads, [&](std::size_t i) {
    const auto probs = ensemble_predict_row(model, X.data() + i * p);
    std::copy(probs.begin(), probs.end(), out.begin() + static_cast<std::ptrdiff_t>(i * probs.size()));
  });
  return out;
}

inline int argmax_class(const ForestEnsembleModel& model, const double* probs) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < model.classes.size(); ++c)
    if (probs[c] > probs[best]) best = c;  // ties keep the lower class index
  return model.classes[best];
}

// ---------------------------------------------------------------------------
// Binary persistence: magic + version, little-endian payload, FNV-1a footer.
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kModelMagic[8] = {'R', 'S', 'T', 'K', 'M', 'D', 'L', '1'};

struct BinWriter {
  std::string buf;

  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf.append(s);
  }
};

struct BinReader {
  const std::string& buf;
  std::size_t pos = 0;

  template <typename T>
  T get() {
    if (pos + sizeof(T) > buf.size()) throw validation_error("model payload truncated");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto len = get<std::uint32_t>();
    if (pos + len > buf.size()) throw validation_error("model payload truncated");
    std::string s = buf.substr(pos, len);
    pos += len;
    return s;
  }
};

}  // namespace detail

inline void save_model(const ForestEnsembleModel& model, const std::filesystem::path& path) {
  detail::BinWriter w;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.classes.size()));
  for (int c : model.classes) w.put<std::int32_t>(c);
  w.put<std::int32_t>(model.hyper.n_estimators);
  w.put<std::int32_t>(model.hyper.max_features);
  w.put<std::int32_t>(model.hyper.min_samples_leaf);
  w.put<std::uint8_t>(model.hyper.balanced_class_weight ? 1 : 0);
  w.put<std::uint8_t>(model.hyper.bootstrap ? 1 : 0);
  w.put<std::uint64_t>(model.master_seed);

  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.selected.size()));
  for (const auto& s : model.selected) w.put_string(s);

  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.stats.descriptors.size()));
  for (std::size_t i = 0; i < model.stats.descriptors.size(); ++i) {
    w.put_string(model.stats.descriptors[i]);
    w.put<double>(model.stats.impute_mean[i]);
    w.put<double>(model.stats.z_mean[i]);
    w.put<double>(model.stats.z_std[i]);
  }

  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.forests.size()));
  for (const auto& forest : model.forests) {
    w.put<std::uint64_t>(forest.seed);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(forest.trees.size()));
    for (const auto& tree : forest.trees) {
      w.put<std::uint32_t>(static_cast<std::uint32_t>(tree.nodes.size()));
      for (const auto& nd : tree.nodes) {
        w.put<std::int32_t>(nd.feature);
        w.put<double>(nd.threshold);
        w.put<std::int32_t>(nd.left);
        w.put<std::int32_t>(nd.right);
        w.put<std::int32_t>(nd.dist_offset);
      }
      w.put<std::uint32_t>(static_cast<std::uint32_t>(tree.leaf_dist.size()));
      for (double v : tree.leaf_dist) w.put<double>(v);
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write model: " + path.string());
  out.write(detail::kModelMagic, 8);
  const std::uint64_t checksum = fnv1a64(w.buf.data(), w.buf.size());
  out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  out.write(reinterpret_cast<const char*>(&checksum), 8);
}

inline ForestEnsembleModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open model: " + path.string());
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (all.size() < 16) throw validation_error("model file truncated: " + path.string());
  if (std::memcmp(all.data(), detail::kModelMagic, 8) != 0)
    throw validation_error("unknown model version tag in " + path.string());
  const std::string payload = all.substr(8, all.size() - 16);
  std::uint64_t stored;
  std::memcpy(&stored, all.data() + all.size() - 8, 8);
  if (stored != fnv1a64(payload.data(), payload.size()))
    throw validation_error("model checksum mismatch (corrupted payload): " + path.string());

  detail::BinReader r{payload};
  ForestEnsembleModel model;
  const auto k = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < k; ++i) model.classes.push_back(r.get<std::int32_t>());
  model.hyper.n_estimators = r.get<std::int32_t>();
  model.hyper.max_features = r.get<std::int32_t>();
  model.hyper.min_samples_leaf = r.get<std::int32_t>();
  model.hyper.balanced_class_weight = r.get<std::uint8_t>() != 0;
  model.hyper.bootstrap = r.get<std::uint8_t>() != 0;
  model.master_seed = r.get<std::uint64_t>();

  const auto n_sel = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_sel; ++i) model.selected.push_back(r.get_string());

  const auto n_stats = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_stats; ++i) {
    model.stats.descriptors.push_back(r.get_string());
    model.stats.impute_mean.push_back(r.get<double>());
    model.stats.z_mean.push_back(r.get<double>());
    model.stats.z_std.push_back(r.get<double>());
  }

  const auto n_forests = r.get<std::uint32_t>();
  model.forests.resize(n_forests);
  for (auto& forest : model.forests) {
    forest.classes = model.classes;
    forest.seed = r.get<std::uint64_t>();
    const auto n_trees = r.get<std::uint32_t>();
    forest.trees.resize(n_trees);
    for (auto& tree : forest.trees) {
      tree.n_classes = static_cast<int>(k);
      const auto n_nodes = r.get<std::uint32_t>();
      tree.nodes.resize(n_nodes);
      for (auto& nd : tree.nodes) {
        nd.feature = r.get<std::int32_t>();
        nd.threshold = r.get<double>();
        nd.left = r.get<std::int32_t>();
        nd.right = r.get<std::int32_t>();
        nd.dist_offset = r.get<std::int32_t>();
      }
      const auto n_dist = r.get<std::uint32_t>();
      tree.leaf_dist.resize(n_dist);
      for (auto& v : tree.leaf_dist) v = r.get<double>();
    }
  }
  if (r.pos != payload.size()) throw validation_error("model payload has trailing bytes: " + path.string());
  return model;
}

}  // namespace radstack
