#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radstack/common.hpp"
#include "radstack/ensemble.hpp"
#include "radstack/extract.hpp"
#include "radstack/manifest.hpp"
#include "radstack/matrix.hpp"
#include "radstack/metrics.hpp"
#include "radstack/selection.hpp"
#include "radstack/smote.hpp"
#include "radstack/stability.hpp"
#include "radstack/tableprep.hpp"

namespace radstack {

inline constexpr const char* kVersion = "radstack 1.0.0";

struct PipelineConfig {
  Task task = Task::IDH;
  std::string experiment = "both";  // "1" (no filtering), "2" (filtering), "both"
  double tau = 0.95;
  SelectionMethod selector = SelectionMethod::MRMR;
  std::size_t n_features = 10;
  int n_forests = 50;
  ForestHyper forest;
  MrmrScheme mrmr_scheme = MrmrScheme::quotient;
  std::string smote_mode = "auto";  // auto | on | off
  bool smote_before_selection = false;
  int smote_k = 5;
  std::uint64_t master_seed = 0;
  int threads = 1;
  int bins = 32;
  bool include_age = false;
  bool report_uauc = true;
  int uauc_iters = 100;
  std::string discovery_rater = "truth";

  std::filesystem::path discovery_manifest;
  std::filesystem::path test_manifest;
  std::filesystem::path out_dir;
  // optional precomputed tables; when set, extraction is skipped and the
  // manifests only supply labels
  std::filesystem::path discovery_features;
  std::map<std::string, std::filesystem::path> test_features;  // scheme -> csv

  /// Hash of the semantic fields only: thread count and output paths never
  /// affect results, so they stay out of the provenance hash.
  std::uint64_t semantic_hash() const {
    std::string blob = std::string(to_token(task)) + '|' + experiment + '|' + std::to_string(tau) + '|' +
                       to_token(selector) + '|' + std::to_string(n_features) + '|' +
                       std::to_string(n_forests) + '|' + std::to_string(forest.n_estimators) + '|' +
                       std::to_string(forest.max_features) + '|' + std::to_string(forest.min_samples_leaf) +
                       '|' + (forest.balanced_class_weight ? "bal" : "unw") + '|' +
                       (forest.bootstrap ? "bs" : "nobs") + '|' +
                       (mrmr_scheme == MrmrScheme::quotient ? "fcq" : "fcd") + '|' + smote_mode + '|' +
                       (smote_before_selection ? "pre" : "post") + '|' + std::to_string(smote_k) + '|' +
                       std::to_string(master_seed) + '|' + std::to_string(bins) + '|' +
                       (include_age ? "age" : "noage") + '|' + std::to_string(uauc_iters) + '|' +
                       discovery_rater;
    return fnv1a64(blob);
  }
};

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                                const std::filesystem::path& base_dir = {}) {
  PipelineConfig c;
  if (j.contains("task")) c.task = parse_task(j["task"].get<std::string>());
  c.experiment = j.value("experiment", c.experiment);
  if (c.experiment != "1" && c.experiment != "2" && c.experiment != "both")
    throw validation_error("config: experiment must be \"1\", \"2\" or \"both\"");
  c.tau = j.value("tau", c.tau);
  if (!(c.tau > 0 && c.tau <= 1)) throw validation_error("config: tau must be in (0, 1]");
  if (j.contains("selector")) {
    const auto s = j["selector"].get<std::string>();
    if (s == "mrmr") c.selector = SelectionMethod::MRMR;
    else if (s == "rfe-svm") c.selector = SelectionMethod::RFE_SVM;
    else throw validation_error("config: selector must be mrmr or rfe-svm");
  }
  c.n_features = j.value("n_features", c.n_features);
  if (c.n_features < 1) throw validation_error("config: n_features must be >= 1");
  if (j.contains("mrmr_scheme")) {
    const auto v = j["mrmr_scheme"].get<std::string>();
    if (v == "quotient") c.mrmr_scheme = MrmrScheme::quotient;
    else if (v == "difference") c.mrmr_scheme = MrmrScheme::difference;
    else throw validation_error("config: mrmr_scheme must be quotient or difference");
  }
  c.n_forests = j.value("n_forests", c.n_forests);
  c.forest.n_estimators = j.value("n_estimators", c.forest.n_estimators);
  c.forest.max_features = j.value("max_features", c.forest.max_features);
  c.forest.min_samples_leaf = j.value("min_samples_leaf", c.forest.min_samples_leaf);
  c.forest.balanced_class_weight = j.value("balanced_class_weight", c.forest.balanced_class_weight);
  c.forest.bootstrap = j.value("bootstrap", c.forest.bootstrap);
  c.smote_mode = j.value("smote", c.smote_mode);
  c.smote_before_selection = j.value("smote_before_selection", c.smote_before_selection);
  c.smote_k = j.value("smote_k", c.smote_k);
  c.master_seed = j.value("seed", c.master_seed);
  c.threads = j.value("threads", c.threads);
  c.bins = j.value("bins", c.bins);
  c.include_age = j.value("include_age", c.include_age);
  c.report_uauc = j.value("report_uauc", c.report_uauc);
  c.uauc_iters = j.value("uauc_iters", c.uauc_iters);
  c.discovery_rater = j.value("discovery_rater", c.discovery_rater);
  if (j.contains("discovery_manifest")) c.discovery_manifest = base_dir / j["discovery_manifest"].get<std::string>();
  if (j.contains("test_manifest")) c.test_manifest = base_dir / j["test_manifest"].get<std::string>();
  if (j.contains("out_dir")) c.out_dir = base_dir / j["out_dir"].get<std::string>();
  if (j.contains("discovery_features"))
    c.discovery_features = base_dir / j["discovery_features"].get<std::string>();
  if (j.contains("test_features"))
    for (const auto& [scheme, path] : j["test_features"].items())
      c.test_features[scheme] = base_dir / path.template get<std::string>();
  return c;
}

/// Everything a run consumes, with test labels sealed until evaluation.
struct PipelineInputs {
  FeatureMatrix discovery;
  std::vector<int> discovery_labels;
  std::vector<std::string> scheme_names;             // segmentation schemes (raters)
  std::map<std::string, FeatureMatrix> test_tables;  // scheme -> raw features
  LabelVault test_labels;
};

/// Builds the run inputs: either extracts from the manifests (discovery with
/// the designated rater, the test cohort once per rater sharing filtered
/// channels) or loads the precomputed per-scheme feature tables; manifests
/// always supply the labels.
inline PipelineInputs build_pipeline_inputs(const PipelineConfig& cfg) {
  ExtractConfig ec;
  ec.scheme.bin_count = cfg.bins;
  ec.include_age = cfg.include_age;

  const auto disc_manifest = load_manifest(cfg.discovery_manifest);
  PipelineInputs in;
  if (cfg.discovery_features.empty()) {
    in.discovery = extract_cohort(disc_manifest, cfg.discovery_rater, ec, cfg.threads);
  } else {
    in.discovery = read_feature_csv(cfg.discovery_features);
  }
  std::map<std::string, int> disc_labels;
  for (const auto& s : disc_manifest.subjects) {
    if (!s.label) throw validation_error("discovery subject '" + s.id + "' has no label");
    if (s.label->task != cfg.task)
      throw validation_error("discovery subject '" + s.id + "' labelled for a different task");
    disc_labels[s.id] = s.label->value;
  }
  in.discovery_labels.reserve(in.discovery.rows());
  for (const auto& id : in.discovery.subject_ids) {
    auto it = disc_labels.find(id);
    if (it == disc_labels.end()) throw validation_error("no label for discovery subject '" + id + "'");
    in.discovery_labels.push_back(it->second);
  }

  auto [test_manifest, vault] = strip_labels(load_manifest(cfg.test_manifest));
  in.test_labels = std::move(vault);
  if (cfg.test_features.empty()) {
    std::vector<std::string> raters = test_manifest.rater_names();
    raters.erase(std::remove(raters.begin(), raters.end(), cfg.discovery_rater), raters.end());
    if (raters.empty())
      throw validation_error("test manifest has no rater masks besides the discovery rater");
    in.scheme_names = raters;
    auto tables = extract_cohort_all_raters(test_manifest, ec, cfg.threads);
    for (const auto& r : raters) in.test_tables[r] = std::move(tables.at(r));
  } else {
    for (const auto& [scheme, path] : cfg.test_features) {
      in.scheme_names.push_back(scheme);
      in.test_tables[scheme] = read_feature_csv(path);
    }
  }
  return in;
}

struct SelectedFeatureReport {
  std::string descriptor;
  double relevance_f = kNaN;
  double uauc_mean = kNaN, uauc_std = kNaN;
  double occc = kNaN;  // from the rater stack; NaN when not computable
};

struct ExperimentResult {
  bool stability_filtering = false;
  std::size_t pool_size = 0;       // candidates entering MAD filtering
  std::size_t pool_after_mad = 0;  // candidates entering selection
  std::vector<SelectedFeatureReport> selected;
  std::vector<std::string> scheme_names;
  std::map<std::string, double> per_scheme_auc;
  std::map<std::string, std::vector<double>> per_scheme_per_class_auc;
  double auc_mean = kNaN, auc_std = kNaN, rsd_percent = kNaN;
  // per scheme: subject ids + row-major probabilities
  std::map<std::string, std::vector<double>> per_scheme_probs;
  std::vector<std::string> test_subject_ids;
  std::vector<int> classes;
  ForestEnsembleModel model;
};

/// Wraps a pipeline stage so failures carry their stage name.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const validation_error& e) {
    throw validation_error(std::string("stage '") + name + "': " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage '") + name + "': " + e.what());
  }
}

namespace detail {

inline std::vector<int> ordered_test_labels(const LabelVault& vault, const std::vector<std::string>& ids) {
  const auto& map = vault.open();
  std::vector<int> y;
  y.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = map.find(id);
    if (it == map.end()) throw validation_error("test subject '" + id + "' has no label");
    y.push_back(it->second);
  }
  return y;
}

}  // namespace detail

/// One experiment: [optional stability filter] -> MAD filter -> fit_clean ->
/// selection -> optional SMOTE -> 50-forest ensemble -> per-scheme
/// apply_clean + predict -> evaluation.
inline ExperimentResult run_experiment(const PipelineConfig& cfg, PipelineInputs& inputs,
                                       bool stability_filtering) {
  ExperimentResult res;
  res.stability_filtering = stability_filtering;
  res.scheme_names = inputs.scheme_names;

  // candidate pool (descriptor names only may cross from the rater stack)
  std::vector<std::size_t> pool;
  std::map<std::string, double> occc_by_name;
  if (stability_filtering) {
    RaterStack stack;
    for (const auto& r : inputs.scheme_names) {
      stack.rater_names.push_back(r);
      stack.matrices.push_back(inputs.test_tables.at(r));
    }
    const auto report = stage("stability", [&] { return stability_filter(stack, cfg.tau, false, cfg.threads); });
    for (std::size_t i = 0; i < report.descriptors.size(); ++i)
      occc_by_name[report.descriptors[i]] = report.occc_values[i];
    const std::set<std::string> keep(report.augmented.begin(), report.augmented.end());
    for (std::size_t c = 0; c < inputs.discovery.cols(); ++c)
      if (keep.count(inputs.discovery.descriptors[c].str())) pool.push_back(c);
  } else {
    // occc still reported for the selected features (diagnostics only)
    RaterStack stack;
    for (const auto& r : inputs.scheme_names) {
      stack.rater_names.push_back(r);
      stack.matrices.push_back(inputs.test_tables.at(r));
    }
    const auto report = stage("stability", [&] { return stability_filter(stack, cfg.tau, false, cfg.threads); });
    for (std::size_t i = 0; i < report.descriptors.size(); ++i)
      occc_by_name[report.descriptors[i]] = report.occc_values[i];
    for (std::size_t c = 0; c < inputs.discovery.cols(); ++c) pool.push_back(c);
  }
  res.pool_size = pool.size();

  // MAD filter on the pooled discovery columns
  FeatureMatrix disc_pool = inputs.discovery.select_columns(pool);
  const auto mad_keep = stage("mad-filter", [&] { return mad_filter(disc_pool); });
  disc_pool = disc_pool.select_columns(mad_keep);
  res.pool_after_mad = disc_pool.cols();
  if (disc_pool.cols() < cfg.n_features)
    throw validation_error("stage 'mad-filter': candidate pool smaller than n_features");

  auto [cleaned, stats] = stage("fit-clean", [&] { return fit_clean(disc_pool); });

  std::vector<int> y = inputs.discovery_labels;

  // optional SMOTE before selection (non-default order)
  FeatureMatrix selection_input = cleaned;
  std::vector<int> selection_labels = y;
  const bool want_smote = cfg.smote_mode == "on" ||
                          (cfg.smote_mode == "auto" && [&] {
                            std::map<int, std::size_t> counts;
                            for (int v : y) ++counts[v];
                            std::size_t lo = SIZE_MAX, hi = 0;
                            for (auto& [c, n] : counts) {
                              lo = std::min(lo, n);
                              hi = std::max(hi, n);
                            }
                            return lo != hi;
                          }());
  if (cfg.smote_mode != "auto" && cfg.smote_mode != "on" && cfg.smote_mode != "off")
    throw validation_error("config: smote must be auto, on or off");

  if (want_smote && cfg.smote_before_selection) {
    std::vector<double> X = selection_input.values;
    smote(X, selection_labels, selection_input.cols(), cfg.smote_k, mix_seed(cfg.master_seed, 11));
    selection_input.values = std::move(X);
    selection_input.subject_ids.resize(selection_labels.size());
    for (std::size_t i = inputs.discovery.rows(); i < selection_labels.size(); ++i)
      selection_input.subject_ids[i] = "smote_" + std::to_string(i);
  }

  SelectionResult sel;
  if (cfg.selector == SelectionMethod::MRMR) {
    sel = stage("selection", [&] {
      return mrmr(selection_input, selection_labels, cfg.n_features, nullptr, cfg.mrmr_scheme);
    });
  } else {
    sel = stage("selection", [&] {
      return rfe_svm(selection_input, selection_labels, cfg.n_features, 1.0, mix_seed(cfg.master_seed, 7));
    });
  }

  // training matrix: selected columns of the (possibly oversampled) table;
  // under the default order SMOTE runs here, on the selected columns only
  const FeatureMatrix& train_source = cfg.smote_before_selection ? selection_input : cleaned;
  const std::vector<int>& train_labels_source = cfg.smote_before_selection ? selection_labels : y;
  const std::size_t p = sel.selected.size();
  std::vector<double> X_train(train_source.rows() * p);
  for (std::size_t i = 0; i < train_source.rows(); ++i)
    for (std::size_t j = 0; j < p; ++j) X_train[i * p + j] = train_source.at(i, sel.selected[j]);
  std::vector<int> y_train = train_labels_source;
  if (want_smote && !cfg.smote_before_selection)
    smote(X_train, y_train, p, cfg.smote_k, mix_seed(cfg.master_seed, 13));

  ForestEnsembleModel model = stage("train", [&] {
    return train_ensemble(X_train, y_train, y_train.size(), p, cfg.forest, cfg.n_forests,
                          mix_seed(cfg.master_seed, 17), cfg.threads);
  });
  model.selected = sel.selected_names;
  ColumnStats sel_stats;
  for (auto c : sel.selected) {
    sel_stats.descriptors.push_back(stats.descriptors[c]);
    sel_stats.impute_mean.push_back(stats.impute_mean[c]);
    sel_stats.z_mean.push_back(stats.z_mean[c]);
    sel_stats.z_std.push_back(stats.z_std[c]);
  }
  model.stats = sel_stats;
  res.classes = model.classes;

  // selected-feature diagnostics
  for (std::size_t j = 0; j < sel.selected_names.size(); ++j) {
    SelectedFeatureReport rep;
    rep.descriptor = sel.selected_names[j];
    rep.relevance_f = sel.relevance[j];
    auto it = occc_by_name.find(rep.descriptor);
    if (it != occc_by_name.end()) rep.occc = it->second;
    else if (rep.descriptor == age_descriptor().str() ||
             parse_descriptor(rep.descriptor).region == Region::BRAIN)
      rep.occc = 1.0;  // segmentation-independent by construction
    if (cfg.report_uauc) {
      const auto [m, s] = uauc(cleaned.column(sel.selected[j]), y, cfg.uauc_iters, 0.7,
                               mix_seed(cfg.master_seed, 19 + j), 200, cfg.threads);
      rep.uauc_mean = m;
      rep.uauc_std = s;
    }
    res.selected.push_back(rep);
  }

  // per-scheme prediction on raw test tables via the fitted transform
  const auto& first_table = inputs.test_tables.at(inputs.scheme_names.front());
  res.test_subject_ids = first_table.subject_ids;
  for (const auto& scheme : inputs.scheme_names) {
    const auto& raw = inputs.test_tables.at(scheme);
    if (raw.subject_ids != res.test_subject_ids)
      throw validation_error("pipeline: test tables disagree on subject order");
    // restrict raw test table to the selected descriptors (by name)
    std::vector<std::size_t> cols;
    for (const auto& name : sel.selected_names) {
      const int c = raw.column_index(name);
      if (c < 0) throw validation_error("pipeline: test table lacks descriptor " + name);
      cols.push_back(static_cast<std::size_t>(c));
    }
    FeatureMatrix sub = raw.select_columns(cols);
    const FeatureMatrix transformed = apply_clean(sub, sel_stats);
    const auto probs =
        ensemble_predict(model, transformed.values, transformed.rows(), transformed.cols(), cfg.threads);
    res.per_scheme_probs[scheme] = probs;
  }
  res.model = std::move(model);

  // evaluation stage: test labels unlock here and only here
  inputs.test_labels.unlock();
  const auto y_test = detail::ordered_test_labels(inputs.test_labels, res.test_subject_ids);
  const std::size_t k = res.classes.size();
  std::vector<double> aucs;
  for (const auto& scheme : inputs.scheme_names) {
    const auto& probs = res.per_scheme_probs.at(scheme);
    if (k == 2) {
      std::vector<double> score(y_test.size());
      std::vector<int> bin(y_test.size());
      for (std::size_t i = 0; i < y_test.size(); ++i) {
        score[i] = probs[i * 2 + 1];
        bin[i] = y_test[i] == res.classes[1] ? 1 : 0;
      }
      res.per_scheme_auc[scheme] = roc_auc(score, bin).auc;
    } else {
      std::vector<int> yidx(y_test.size());
      for (std::size_t i = 0; i < y_test.size(); ++i)
        yidx[i] = static_cast<int>(std::lower_bound(res.classes.begin(), res.classes.end(), y_test[i]) -
                                   res.classes.begin());
      const auto r = macro_ovr_auc(probs, y_test.size(), k, yidx);
      res.per_scheme_auc[scheme] = r.auc;
      res.per_scheme_per_class_auc[scheme] = r.per_class_auc;
    }
    aucs.push_back(res.per_scheme_auc[scheme]);
  }
  res.auc_mean = mean_of(aucs);
  res.auc_std = sample_std(aucs);
  res.rsd_percent = aucs.size() >= 2 ? rsd(aucs) : kNaN;
  return res;
}

struct RunReport {
  PipelineConfig config;
  std::optional<ExperimentResult> without_filtering;
  std::optional<ExperimentResult> with_filtering;
  // scheme -> DeLong of experiment 2 vs experiment 1 (per class when multiclass)
  std::map<std::string, std::vector<DelongResult>> delong_with_vs_without;
};

namespace detail {

inline json experiment_to_json(const ExperimentResult& e) {
  json j;
  j["stability_filtering"] = e.stability_filtering;
  j["pool_size"] = e.pool_size;
  j["pool_after_mad"] = e.pool_after_mad;
  json sel = json::array();
  for (const auto& f : e.selected) {
    json d;
    d["descriptor"] = f.descriptor;
    d["relevance_f"] = std::isfinite(f.relevance_f) ? json(f.relevance_f) : json(nullptr);
    d["uauc_mean"] = std::isnan(f.uauc_mean) ? json(nullptr) : json(f.uauc_mean);
    d["uauc_std"] = std::isnan(f.uauc_std) ? json(nullptr) : json(f.uauc_std);
    d["occc"] = std::isnan(f.occc) ? json(nullptr) : json(f.occc);
    sel.push_back(std::move(d));
  }
  j["selected"] = std::move(sel);
  json auc = json::object();
  for (const auto& s : e.scheme_names) auc[s] = e.per_scheme_auc.at(s);
  j["per_scheme_auc"] = std::move(auc);
  if (!e.per_scheme_per_class_auc.empty()) {
    json pc = json::object();
    for (const auto& s : e.scheme_names) {
      json arr = json::array();
      for (double v : e.per_scheme_per_class_auc.at(s)) arr.push_back(std::isnan(v) ? json(nullptr) : json(v));
      pc[s] = std::move(arr);
    }
    j["per_scheme_per_class_auc"] = std::move(pc);
  }
  j["auc_mean"] = e.auc_mean;
  j["auc_std"] = e.auc_std;
  j["rsd_percent"] = e.rsd_percent;
  return j;
}

}  // namespace detail

inline json run_report_to_json(const RunReport& rep) {
  json j;
  j["version"] = kVersion;
  j["task"] = to_token(rep.config.task);
  j["master_seed"] = rep.config.master_seed;
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(rep.config.semantic_hash()));
  j["config_hash"] = hex;
  json exps = json::object();
  if (rep.without_filtering) exps["without_filtering"] = detail::experiment_to_json(*rep.without_filtering);
  if (rep.with_filtering) exps["with_filtering"] = detail::experiment_to_json(*rep.with_filtering);
  j["experiments"] = std::move(exps);
  if (!rep.delong_with_vs_without.empty()) {
    json d = json::object();
    for (const auto& [scheme, results] : rep.delong_with_vs_without) {
      json arr = json::array();
      for (const auto& r : results) {
        json e;
        e["auc_with"] = r.auc_a;
        e["auc_without"] = r.auc_b;
        e["z"] = std::isfinite(r.z) ? json(r.z) : json(nullptr);
        e["p"] = r.p;
        e["exact_difference"] = r.exact_difference;
        arr.push_back(std::move(e));
      }
      d[scheme] = std::move(arr);
    }
    j["delong_with_vs_without"] = std::move(d);
  }
  return j;
}

/// Both experiments (per config) on shared inputs, plus the per-scheme DeLong
/// comparison of with- vs without-filtering predictions.
inline RunReport run_pipeline(const PipelineConfig& cfg, PipelineInputs& inputs) {
  RunReport rep;
  rep.config = cfg;
  if (cfg.experiment == "1" || cfg.experiment == "both")
    rep.without_filtering = run_experiment(cfg, inputs, false);
  if (cfg.experiment == "2" || cfg.experiment == "both")
    rep.with_filtering = run_experiment(cfg, inputs, true);

  if (rep.without_filtering && rep.with_filtering) {
    const auto& e1 = *rep.without_filtering;
    const auto& e2 = *rep.with_filtering;
    const auto y_test = detail::ordered_test_labels(inputs.test_labels, e2.test_subject_ids);
    const std::size_t k = e2.classes.size();
    for (const auto& scheme : e2.scheme_names) {
      const auto& p2 = e2.per_scheme_probs.at(scheme);
      const auto& p1 = e1.per_scheme_probs.at(scheme);
      std::vector<DelongResult> results;
      if (k == 2) {
        std::vector<double> s2(y_test.size()), s1(y_test.size());
        std::vector<int> bin(y_test.size());
        for (std::size_t i = 0; i < y_test.size(); ++i) {
          s2[i] = p2[i * 2 + 1];
          s1[i] = p1[i * 2 + 1];
          bin[i] = y_test[i] == e2.classes[1] ? 1 : 0;
        }
        results.push_back(delong_test(s2, s1, bin));
      } else {
        for (std::size_t c = 0; c < k; ++c) {
          std::vector<double> s2(y_test.size()), s1(y_test.size());
          std::vector<int> bin(y_test.size());
          std::size_t pos = 0;
          for (std::size_t i = 0; i < y_test.size(); ++i) {
            s2[i] = p2[i * k + c];
            s1[i] = p1[i * k + c];
            bin[i] = y_test[i] == e2.classes[c] ? 1 : 0;
            pos += static_cast<std::size_t>(bin[i]);
          }
          if (pos == 0 || pos == y_test.size()) {
            results.push_back(DelongResult{});  // class absent: NaN row
            continue;
          }
          results.push_back(delong_test(s2, s1, bin));
        }
      }
      rep.delong_with_vs_without[scheme] = std::move(results);
    }
  }
  return rep;
}

inline RunReport run_pipeline_from_manifests(const PipelineConfig& cfg) {
  PipelineInputs inputs = build_pipeline_inputs(cfg);
  return run_pipeline(cfg, inputs);
}

}  // namespace radstack
