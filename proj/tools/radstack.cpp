// radstack command-line front end. Subcommands cover the whole pipeline:
// synth, extract, stability, prep, select, train, predict, evaluate, fuse,
// segmetrics, rank and run. Exit codes: 0 ok, 2 validation error, 3 runtime.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "radstack/radstack.hpp"

namespace fs = std::filesystem;
using namespace radstack;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

void write_json_file(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<int> labels_for_subjects(const CohortManifest& manifest, const std::vector<std::string>& ids,
                                     Task& task_out) {
  std::map<std::string, SubjectLabel> by_id;
  for (const auto& s : manifest.subjects)
    if (s.label) by_id[s.id] = *s.label;
  if (by_id.empty()) throw validation_error("manifest has no labels");
  task_out = by_id.begin()->second.task;
  std::vector<int> y;
  y.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw validation_error("no label for subject '" + id + "'");
    if (it->second.task != task_out) throw validation_error("mixed label tasks in manifest");
    y.push_back(it->second.value);
  }
  return y;
}

struct PredTable {
  std::vector<std::string> ids;
  std::vector<double> probs;  // row-major n x k
  std::size_t k = 0;
};

PredTable read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open predictions: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw validation_error("empty predictions: " + path.string());
  const auto header = radstack::detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "subject_id" || header.back() != "argmax")
    throw validation_error("bad predictions header in " + path.string());
  PredTable t;
  t.k = header.size() - 2;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = radstack::detail::split_csv_line(line);
    if (f.size() != header.size()) throw validation_error("bad predictions row in " + path.string());
    t.ids.push_back(f[0]);
    for (std::size_t c = 1; c + 1 < f.size(); ++c) t.probs.push_back(std::stod(f[c]));
  }
  return t;
}

void write_predictions(const fs::path& path, const std::vector<std::string>& ids,
                       const std::vector<double>& probs, const std::vector<int>& classes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write predictions: " + path.string());
  const std::size_t k = classes.size();
  out << "subject_id";
  for (std::size_t c = 0; c < k; ++c) out << ",p_class" << classes[c];
  out << ",argmax\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    std::size_t best = 0;
    for (std::size_t c = 0; c < k; ++c) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", probs[i * k + c]);
      out << ',' << buf;
      if (probs[i * k + c] > probs[i * k + best]) best = c;
    }
    out << ',' << classes[best] << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radstack: multiregional radiomics stability and modeling toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir_flag, global_config;
  app.add_option("--config", global_config, "pipeline config JSON (defaults for seed/threads; used by run)");
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads")->capture_default_str();
  app.add_option("--out", out_dir_flag, "output directory override");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  std::string synth_spec_path, synth_out;
  synth->add_option("--spec", synth_spec_path, "synthetic spec JSON (optional)");
  synth->add_option("--out", synth_out, "output directory")->required();

  // ---- extract ----
  auto* extract = app.add_subcommand("extract", "extract the feature table for one rater");
  std::string ex_manifest, ex_out, ex_rater;
  int ex_bins = 32;
  bool ex_age = false;
  extract->add_option("--manifest", ex_manifest)->required();
  extract->add_option("--out", ex_out)->required();
  extract->add_option("--rater", ex_rater, "rater name (required when several)");
  extract->add_option("--bins", ex_bins, "discretization bin count")->capture_default_str();
  extract->add_flag("--include-age", ex_age, "append the clinical Age descriptor");

  // ---- stability ----
  auto* stability = app.add_subcommand("stability", "OCCC stability filter across rater tables");
  std::vector<std::string> st_tables;
  std::string st_out;
  double st_tau = 0.95;
  bool st_icc = false;
  stability->add_option("--features-per-rater", st_tables, "feature CSV per rater")->required()->expected(-2);
  stability->add_option("--tau", st_tau)->capture_default_str();
  stability->add_flag("--icc", st_icc, "also report ICC(2,1)");
  stability->add_option("--out", st_out)->required();

  // ---- prep ----
  auto* prep = app.add_subcommand("prep", "outlier/NaN cleaning and z-scoring");
  std::string prep_disc, prep_test, prep_out_dir;
  prep->add_option("--discovery", prep_disc)->required();
  prep->add_option("--test", prep_test);
  prep->add_option("--out-dir", prep_out_dir)->required();

  // ---- select ----
  auto* select = app.add_subcommand("select", "discriminative feature selection");
  std::string sl_features, sl_labels, sl_method = "mrmr", sl_stable, sl_out;
  std::size_t sl_n = 10;
  select->add_option("--features", sl_features)->required();
  select->add_option("--labels", sl_labels, "manifest with labels")->required();
  select->add_option("--method", sl_method)->check(CLI::IsMember({"mrmr", "rfe-svm"}))->capture_default_str();
  select->add_option("--n", sl_n)->capture_default_str();
  select->add_option("--stable", sl_stable, "stability.json restricting the pool");
  select->add_option("--out", sl_out)->required();

  // ---- train ----
  auto* train = app.add_subcommand("train", "train the 50-forest soft-voting ensemble");
  std::string tr_features, tr_labels, tr_selection, tr_stats, tr_out;
  int tr_forests = 50;
  train->add_option("--features", tr_features, "cleaned discovery CSV")->required();
  train->add_option("--labels", tr_labels)->required();
  train->add_option("--selection", tr_selection)->required();
  train->add_option("--stats", tr_stats, "stats.json from prep (embedded for raw-input inference)");
  train->add_option("--forests", tr_forests)->capture_default_str();
  train->add_option("--out", tr_out)->required();

  // ---- predict ----
  auto* predict = app.add_subcommand("predict", "soft-voting inference");
  std::string pr_model, pr_features, pr_out;
  bool pr_raw = false;
  predict->add_option("--model", pr_model)->required();
  predict->add_option("--features", pr_features, "cleaned test CSV (or raw with --raw)")->required();
  predict->add_flag("--raw", pr_raw, "apply the embedded discovery statistics first");
  predict->add_option("--out", pr_out)->required();

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "AUCs, DeLong and RSD over prediction files");
  std::vector<std::string> ev_preds;
  std::string ev_labels, ev_baseline, ev_out;
  evaluate->add_option("--preds", ev_preds)->required()->expected(-1);
  evaluate->add_option("--labels", ev_labels)->required();
  evaluate->add_option("--baseline", ev_baseline, "prediction file for DeLong comparison");
  evaluate->add_option("--out", ev_out)->required();

  // ---- fuse ----
  auto* fuse = app.add_subcommand("fuse", "STAPLE multi-region label fusion");
  std::vector<std::string> fu_masks;
  std::string fu_out, fu_report;
  fuse->add_option("--masks", fu_masks)->required()->expected(-2);
  fuse->add_option("--out", fu_out)->required();
  fuse->add_option("--report", fu_report);

  // ---- segmetrics ----
  auto* segmetrics = app.add_subcommand("segmetrics", "DSC and HD-95 per subject/region/method");
  std::string sg_ref, sg_out;
  std::vector<std::string> sg_tests;
  segmetrics->add_option("--ref", sg_ref, "directory of reference label masks")->required();
  segmetrics->add_option("--test", sg_tests, "NAME=DIR per method")->required()->expected(-1);
  segmetrics->add_option("--out", sg_out)->required();

  // ---- rank ----
  auto* rank = app.add_subcommand("rank", "FRS ranking with permutation significance");
  std::string rk_metrics, rk_out;
  int rk_perms = 100000;
  rank->add_option("--metrics", rk_metrics)->required();
  rank->add_option("--permutations", rk_perms)->capture_default_str();
  rank->add_option("--out", rk_out)->required();

  // ---- run ----
  auto* run = app.add_subcommand("run", "full pipeline (both experiments) from a config");
  std::string run_config;
  run->add_option("--config", run_config, "config JSON (defaults to the global --config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    // a global config supplies seed/threads defaults for every subcommand
    if (!global_config.empty()) {
      const auto j = read_json_file(global_config);
      if (!app.count("--seed") && j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
      if (!app.count("--threads") && j.contains("threads")) threads = j["threads"].get<int>();
    }
    if (*synth) {
      SyntheticSpec spec;
      if (!synth_spec_path.empty()) spec = synthetic_spec_from_json(read_json_file(synth_spec_path));
      const auto cohort = make_synthetic_cohort(spec, seed);
      const auto [disc, test] = write_synthetic_cohort(cohort, synth_out);
      std::cout << "wrote " << disc << " and " << test << "\n";
    } else if (*extract) {
      const auto manifest = load_manifest(ex_manifest);
      const auto raters = manifest.rater_names();
      if (ex_rater.empty()) {
        if (raters.size() != 1)
          throw validation_error("several raters present; pass --rater (one of " +
                                 std::to_string(raters.size()) + ")");
        ex_rater = raters.front();
      }
      ExtractConfig ec;
      ec.scheme.bin_count = ex_bins;
      ec.include_age = ex_age;
      const auto table = extract_cohort(manifest, ex_rater, ec, threads);
      write_feature_csv(table, ex_out);
      std::cout << "wrote " << ex_out << " (" << table.rows() << " x " << table.cols() << ")\n";
    } else if (*stability) {
      RaterStack stack;
      for (const auto& p : st_tables) {
        stack.rater_names.push_back(fs::path(p).stem().string());
        stack.matrices.push_back(read_feature_csv(p));
      }
      const auto report = stability_filter(stack, st_tau, st_icc, threads);
      save_stability_report(report, st_out);
      std::cout << "retained " << report.retained.size() << " of " << report.descriptors.size()
                << " descriptors (tau=" << st_tau << ")\n";
    } else if (*prep) {
      const auto disc = read_feature_csv(prep_disc);
      auto [cleaned, stats] = fit_clean(disc);
      fs::create_directories(prep_out_dir);
      write_feature_csv(cleaned, fs::path(prep_out_dir) / "discovery_cleaned.csv");
      save_column_stats(stats, fs::path(prep_out_dir) / "stats.json");
      if (!prep_test.empty()) {
        const auto test = read_feature_csv(prep_test);
        write_feature_csv(apply_clean(test, stats), fs::path(prep_out_dir) / "test_cleaned.csv");
      }
      std::cout << "wrote cleaned tables to " << prep_out_dir << "\n";
    } else if (*select) {
      const auto features = read_feature_csv(sl_features);
      Task task;
      const auto y = labels_for_subjects(load_manifest(sl_labels), features.subject_ids, task);
      std::optional<std::vector<std::size_t>> pool;
      if (!sl_stable.empty()) {
        const auto names = load_stability_pool(sl_stable);
        std::vector<std::size_t> cols;
        for (std::size_t c = 0; c < features.cols(); ++c)
          if (names.count(features.descriptors[c].str())) cols.push_back(c);
        pool = std::move(cols);
      }
      SelectionResult res;
      if (sl_method == "mrmr") res = mrmr(features, y, sl_n, pool ? &*pool : nullptr);
      else res = rfe_svm(features, y, sl_n, 1.0, seed, pool ? &*pool : nullptr);
      save_selection(res, sl_out);
      std::cout << "selected " << res.selected_names.size() << " features -> " << sl_out << "\n";
    } else if (*train) {
      const auto features = read_feature_csv(tr_features);
      Task task;
      const auto y = labels_for_subjects(load_manifest(tr_labels), features.subject_ids, task);
      const auto names = load_selection_names(tr_selection);
      std::vector<std::size_t> cols;
      for (const auto& n : names) {
        const int c = features.column_index(n);
        if (c < 0) throw validation_error("feature table lacks selected descriptor " + n);
        cols.push_back(static_cast<std::size_t>(c));
      }
      const auto sub = features.select_columns(cols);
      ForestHyper hyper;
      auto model = train_ensemble(sub.values, y, sub.rows(), sub.cols(), hyper, tr_forests, seed, threads);
      model.selected = names;
      if (!tr_stats.empty()) {
        const auto stats = load_column_stats(tr_stats);
        ColumnStats restricted;
        for (const auto& n : names) {
          auto it = std::find(stats.descriptors.begin(), stats.descriptors.end(), n);
          if (it == stats.descriptors.end()) throw validation_error("stats lack descriptor " + n);
          const auto i = static_cast<std::size_t>(it - stats.descriptors.begin());
          restricted.descriptors.push_back(stats.descriptors[i]);
          restricted.impute_mean.push_back(stats.impute_mean[i]);
          restricted.z_mean.push_back(stats.z_mean[i]);
          restricted.z_std.push_back(stats.z_std[i]);
        }
        model.stats = restricted;
      }
      save_model(model, tr_out);
      std::cout << "wrote model " << tr_out << " (" << model.forests.size() << " forests)\n";
    } else if (*predict) {
      const auto model = load_model(pr_model);
      auto features = read_feature_csv(pr_features);
      std::vector<std::size_t> cols;
      for (const auto& n : model.selected) {
        const int c = features.column_index(n);
        if (c < 0) throw validation_error("feature table lacks model descriptor " + n);
        cols.push_back(static_cast<std::size_t>(c));
      }
      FeatureMatrix sub = features.select_columns(cols);
      if (pr_raw) {
        if (model.stats.descriptors.empty())
          throw validation_error("--raw needs a model trained with --stats");
        sub = apply_clean(sub, model.stats);
      }
      const auto probs = ensemble_predict(model, sub.values, sub.rows(), sub.cols(), threads);
      write_predictions(pr_out, sub.subject_ids, probs, model.classes);
      std::cout << "wrote " << pr_out << "\n";
    } else if (*evaluate) {
      const auto manifest = load_manifest(ev_labels);
      json out;
      json per_file = json::array();
      std::vector<double> overall;
      std::optional<PredTable> baseline;
      if (!ev_baseline.empty()) baseline = read_predictions(ev_baseline);
      for (const auto& path : ev_preds) {
        const auto preds = read_predictions(path);
        Task task;
        const auto y = labels_for_subjects(manifest, preds.ids, task);
        json entry;
        entry["file"] = path;
        if (preds.k == 2) {
          std::vector<double> score(preds.ids.size());
          std::vector<int> bin(preds.ids.size());
          for (std::size_t i = 0; i < preds.ids.size(); ++i) {
            score[i] = preds.probs[i * 2 + 1];
            bin[i] = y[i] == 1 ? 1 : 0;
          }
          const auto r = roc_auc(score, bin);
          entry["auc"] = r.auc;
          overall.push_back(r.auc);
          if (baseline) {
            std::vector<double> bscore(preds.ids.size());
            for (std::size_t i = 0; i < preds.ids.size(); ++i) bscore[i] = baseline->probs[i * 2 + 1];
            const auto d = delong_test(score, bscore, bin);
            entry["delong_vs_baseline"] = {{"auc", d.auc_a}, {"auc_baseline", d.auc_b},
                                           {"z", d.z}, {"p", d.p}};
          }
        } else {
          const auto r = macro_ovr_auc(preds.probs, preds.ids.size(), preds.k, y);
          entry["auc"] = r.auc;
          json pc = json::array();
          for (double v : r.per_class_auc) pc.push_back(std::isnan(v) ? json(nullptr) : json(v));
          entry["per_class_auc"] = std::move(pc);
          overall.push_back(r.auc);
        }
        per_file.push_back(std::move(entry));
      }
      out["per_file"] = std::move(per_file);
      if (overall.size() >= 2) {
        out["auc_mean"] = mean_of(overall);
        out["auc_std"] = sample_std(overall);
        out["rsd_percent"] = rsd(overall);
      }
      write_json_file(out, ev_out);
      std::cout << "wrote " << ev_out << "\n";
    } else if (*fuse) {
      std::vector<LabelMask> masks;
      for (const auto& p : fu_masks) masks.push_back(read_label_mask(p));
      const auto fusion = fuse_multiregion(masks);
      write_label_mask(fusion.fused, fu_out);
      if (!fu_report.empty()) {
        json rep;
        auto staple_json = [](const StapleResult& r) {
          json j;
          j["sensitivity_p"] = r.sensitivity_p;
          j["specificity_q"] = r.specificity_q;
          j["iterations"] = r.iterations;
          j["converged"] = r.converged;
          j["degenerate"] = r.degenerate;
          return j;
        };
        rep["WT"] = staple_json(fusion.wt);
        rep["TC"] = staple_json(fusion.tc);
        rep["ENC"] = staple_json(fusion.enc);
        write_json_file(rep, fu_report);
      }
      std::cout << "wrote " << fu_out << "\n";
    } else if (*segmetrics) {
      std::ofstream out(sg_out);
      if (!out) throw validation_error("cannot write " + sg_out);
      out << "subject_id,region,metric,method,value\n";
      std::vector<std::pair<std::string, fs::path>> methods;
      for (const auto& spec : sg_tests) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw validation_error("--test expects NAME=DIR, got " + spec);
        methods.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
      }
      for (const auto& entry : fs::directory_iterator(sg_ref)) {
        if (entry.path().extension() != ".rawvol") continue;
        const auto name = entry.path().filename();
        const auto ref = read_label_mask(entry.path());
        const auto ref_regions = derive_regions(ref);
        const std::string subject = entry.path().stem().string();
        for (const auto& [method, dir] : methods) {
          const auto test_path = dir / name;
          if (!fs::exists(test_path))
            throw validation_error("missing test mask " + test_path.string() + " for method " + method);
          const auto test_regions = derive_regions(read_label_mask(test_path));
          const std::array<std::pair<const RegionMask*, const RegionMask*>, 3> pairs = {
              std::make_pair(&ref_regions.wt, &test_regions.wt),
              std::make_pair(&ref_regions.tc, &test_regions.tc),
              std::make_pair(&ref_regions.enc, &test_regions.enc)};
          const std::array<const char*, 3> names = {"WT", "TC", "ENC"};
          for (std::size_t i = 0; i < 3; ++i) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", dsc(*pairs[i].first, *pairs[i].second));
            out << subject << ',' << names[i] << ",DSC," << method << ',' << buf << "\n";
            std::snprintf(buf, sizeof(buf), "%.17g", hd95(*pairs[i].first, *pairs[i].second));
            out << subject << ',' << names[i] << ",HD95," << method << ',' << buf << "\n";
          }
        }
      }
      std::cout << "wrote " << sg_out << "\n";
    } else if (*rank) {
      std::ifstream in(rk_metrics);
      if (!in) throw validation_error("cannot open " + rk_metrics);
      std::string line;
      if (!std::getline(in, line) || line.rfind("subject_id,region,metric,method,value", 0) != 0)
        throw validation_error("bad metrics header in " + rk_metrics);
      std::map<std::tuple<std::string, std::string, std::string>, MetricCell> cells;
      std::set<std::string> method_set;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = radstack::detail::split_csv_line(line);
        if (f.size() != 5) throw validation_error("bad metrics row: " + line);
        auto& cell = cells[{f[0], f[1], f[2]}];
        cell.subject = f[0];
        cell.region = f[1];
        cell.metric = f[2];
        cell.per_method[f[3]] = std::stod(f[4]);
        method_set.insert(f[3]);
      }
      std::vector<MetricCell> cell_list;
      for (auto& [k, c] : cells) cell_list.push_back(std::move(c));
      const std::vector<std::string> methods(method_set.begin(), method_set.end());
      const auto table = frs_rank(cell_list, methods);
      json out;
      out["methods"] = methods;
      json cum = json::object(), frs = json::object();
      for (const auto& m : methods) {
        cum[m] = table.cumulative_rank.at(m);
        frs[m] = table.frs.at(m);
      }
      out["cumulative_rank"] = std::move(cum);
      out["frs"] = std::move(frs);
      std::string best;
      for (const auto& m : methods)
        if (table.frs.at(m) == 1) best = m;
      json pvals = json::object();
      for (const auto& m : methods)
        if (m != best) pvals[m] = perm_test(table, best, m, rk_perms, seed);
      out["perm_p_vs_best"] = std::move(pvals);
      out["best"] = best;
      write_json_file(out, rk_out);
      std::cout << "wrote " << rk_out << "\n";
    } else if (*run) {
      if (run_config.empty()) run_config = global_config;
      if (run_config.empty()) throw validation_error("run: pass --config (subcommand or global)");
      const fs::path cfg_path(run_config);
      auto cfg = pipeline_config_from_json(read_json_file(cfg_path),
                                           cfg_path.has_parent_path() ? cfg_path.parent_path() : fs::path("."));
      if (app.count("--seed")) cfg.master_seed = seed;
      if (app.count("--threads")) cfg.threads = threads;
      if (!out_dir_flag.empty()) cfg.out_dir = out_dir_flag;
      if (cfg.out_dir.empty()) throw validation_error("run: config needs out_dir (or pass --out)");
      const auto report = run_pipeline_from_manifests(cfg);
      fs::create_directories(cfg.out_dir);
      write_json_file(run_report_to_json(report), cfg.out_dir / "report.json");
      auto dump_experiment = [&](const ExperimentResult& e, const std::string& tag) {
        for (const auto& scheme : e.scheme_names)
          write_predictions(cfg.out_dir / ("preds_" + tag + "_" + scheme + ".csv"), e.test_subject_ids,
                            e.per_scheme_probs.at(scheme), e.classes);
        save_model(e.model, cfg.out_dir / ("model_" + tag + ".bin"));
      };
      if (report.without_filtering) dump_experiment(*report.without_filtering, "exp1");
      if (report.with_filtering) dump_experiment(*report.with_filtering, "exp2");
      std::cout << "wrote " << (cfg.out_dir / "report.json") << "\n";
    }
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
