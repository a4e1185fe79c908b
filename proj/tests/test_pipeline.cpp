#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "radstack/pipeline.hpp"
#include "radstack/synthetic.hpp"

using namespace radstack;
namespace fs = std::filesystem;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.n_discovery = 14;
  spec.n_test = 8;
  spec.grid = 28;
  spec.n_raters = 3;
  return spec;
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.n_forests = 8;
  cfg.forest.n_estimators = 40;
  cfg.n_features = 4;
  cfg.report_uauc = false;
  cfg.master_seed = 5;
  return cfg;
}

PipelineInputs inputs_from_cohort(const SyntheticCohort& cohort, const PipelineConfig& cfg) {
  ExtractConfig ec;
  ec.scheme.bin_count = cfg.bins;
  PipelineInputs in;
  std::map<std::string, int> test_labels;

  std::vector<const SyntheticSubject*> discovery, test;
  for (const auto& s : cohort.subjects) (s.is_test ? test : discovery).push_back(&s);

  in.discovery.descriptors = enumerate_descriptors(false);
  for (const auto* s : discovery) {
    const auto row = extract_subject(s->data, "truth", ec);
    in.discovery.subject_ids.push_back(row.subject_id);
    in.discovery.values.insert(in.discovery.values.end(), row.values.begin(), row.values.end());
    in.discovery_labels.push_back(s->label);
  }
  for (int r = 0; r < cohort.spec.n_raters; ++r)
    in.scheme_names.push_back("r" + std::to_string(r + 1));
  for (const auto& scheme : in.scheme_names) {
    FeatureMatrix m;
    m.descriptors = in.discovery.descriptors;
    for (const auto* s : test) {
      const auto row = extract_subject(s->data, scheme, ec);
      m.subject_ids.push_back(row.subject_id);
      m.values.insert(m.values.end(), row.values.begin(), row.values.end());
    }
    in.test_tables[scheme] = std::move(m);
  }
  for (const auto* s : test) test_labels[s->data.id] = s->label;
  in.test_labels = LabelVault(std::move(test_labels));
  return in;
}

}  // namespace

TEST_CASE("synthetic cohort generation is seed-deterministic") {
  const auto spec = small_spec();
  const auto a = make_synthetic_cohort(spec, 42);
  const auto b = make_synthetic_cohort(spec, 42);
  REQUIRE(a.subjects.size() == static_cast<std::size_t>(spec.n_discovery + spec.n_test));
  for (std::size_t i = 0; i < a.subjects.size(); ++i) {
    REQUIRE(a.subjects[i].label == b.subjects[i].label);
    REQUIRE(a.subjects[i].data.channels.at("T1").values == b.subjects[i].data.channels.at("T1").values);
    REQUIRE(a.subjects[i].data.masks.at("truth").labels == b.subjects[i].data.masks.at("truth").labels);
  }
  const auto c = make_synthetic_cohort(spec, 43);
  REQUIRE(a.subjects[0].data.channels.at("T1").values != c.subjects[0].data.channels.at("T1").values);
}

TEST_CASE("zero rater noise reproduces the truth mask for every rater") {
  auto spec = small_spec();
  spec.wt_scale_noise = 0;
  spec.tc_scale_noise = 0;
  spec.enc_scale_noise = 0;
  spec.wt_shift_voxels = 0;
  spec.enc_shift_voxels = 0;
  const auto cohort = make_synthetic_cohort(spec, 7);
  for (const auto& s : cohort.subjects) {
    if (!s.is_test) continue;
    for (int r = 1; r <= spec.n_raters; ++r)
      REQUIRE(s.data.masks.at("r" + std::to_string(r)).labels == s.data.masks.at("truth").labels);
  }
}

TEST_CASE("ENC-only rater noise depresses ENC stability below WT") {
  auto spec = small_spec();
  spec.n_discovery = 4;
  spec.n_test = 12;
  spec.wt_scale_noise = 0;
  spec.tc_scale_noise = 0;
  spec.wt_shift_voxels = 0;
  spec.enc_scale_noise = 0.25;
  spec.enc_shift_voxels = 3;
  const auto cohort = make_synthetic_cohort(spec, 11);
  const auto cfg = small_config();
  auto inputs = inputs_from_cohort(cohort, cfg);

  RaterStack stack;
  for (const auto& r : inputs.scheme_names) {
    stack.rater_names.push_back(r);
    stack.matrices.push_back(inputs.test_tables.at(r));
  }
  const auto report = stability_filter(stack, 0.95);
  std::vector<double> wt_occc, enc_occc;
  for (std::size_t i = 0; i < report.descriptors.size(); ++i) {
    if (std::isnan(report.occc_values[i])) continue;
    const auto d = parse_descriptor(report.descriptors[i]);
    if (d.region == Region::WT) wt_occc.push_back(report.occc_values[i]);
    if (d.region == Region::ENC) enc_occc.push_back(report.occc_values[i]);
  }
  REQUIRE(wt_occc.size() > 100);
  REQUIRE(enc_occc.size() > 100);
  REQUIRE(median_of(enc_occc) < median_of(wt_occc));
}

TEST_CASE("run_pipeline is deterministic and filtering helps on planted noise") {
  const auto cohort = make_synthetic_cohort(small_spec(), 3);
  auto cfg = small_config();
  cfg.threads = 2;

  auto inputs1 = inputs_from_cohort(cohort, cfg);
  auto inputs2 = inputs_from_cohort(cohort, cfg);
  const auto rep1 = run_pipeline(cfg, inputs1);
  const auto rep2 = run_pipeline(cfg, inputs2);
  const auto j1 = run_report_to_json(rep1).dump(2);
  const auto j2 = run_report_to_json(rep2).dump(2);
  REQUIRE(j1 == j2);

  // single-threaded run yields byte-identical output
  auto cfg_st = cfg;
  cfg_st.threads = 1;
  auto inputs3 = inputs_from_cohort(cohort, cfg_st);
  REQUIRE(run_report_to_json(run_pipeline(cfg_st, inputs3)).dump(2) == j1);

  // construction plants rater noise on the unstable signal: filtering helps
  REQUIRE(rep1.with_filtering->auc_mean >= rep1.without_filtering->auc_mean);

  // with-filtering pool never contains ENC descriptors under heavy ENC noise
  for (const auto& f : rep1.with_filtering->selected) {
    const auto d = parse_descriptor(f.descriptor);
    REQUIRE(d.region != Region::ENC);
  }
}

TEST_CASE("tau saturating keeps experiments identical when all features are stable") {
  auto spec = small_spec();
  spec.wt_scale_noise = 0;
  spec.tc_scale_noise = 0;
  spec.enc_scale_noise = 0;
  spec.wt_shift_voxels = 0;
  spec.enc_shift_voxels = 0;
  const auto cohort = make_synthetic_cohort(spec, 9);
  auto cfg = small_config();
  auto inputs = inputs_from_cohort(cohort, cfg);
  const auto rep = run_pipeline(cfg, inputs);
  // identical rater tables: every scored descriptor has OCCC 1, the filter
  // is a no-op and both experiments select identical features
  std::vector<std::string> sel1, sel2;
  for (const auto& f : rep.without_filtering->selected) sel1.push_back(f.descriptor);
  for (const auto& f : rep.with_filtering->selected) sel2.push_back(f.descriptor);
  REQUIRE(sel1 == sel2);
  for (const auto& [scheme, auc] : rep.without_filtering->per_scheme_auc)
    REQUIRE(auc == rep.with_filtering->per_scheme_auc.at(scheme));
}

TEST_CASE("leakage guard trips when labels are opened before evaluation") {
  LabelVault vault(std::map<std::string, int>{{"t1", 0}});
  REQUIRE_THROWS_WITH(vault.open(), Catch::Matchers::ContainsSubstring("leakage guard"));
}

TEST_CASE("pipeline config parses and hashes semantically") {
  nlohmann::json j = {{"task", "OS"},      {"selector", "rfe-svm"}, {"n_features", 7},
                      {"tau", 0.9},        {"seed", 123},           {"threads", 4},
                      {"smote", "off"},    {"experiment", "both"}};
  const auto cfg = pipeline_config_from_json(j);
  REQUIRE(cfg.task == Task::OS);
  REQUIRE(cfg.selector == SelectionMethod::RFE_SVM);
  REQUIRE(cfg.n_features == 7);

  // thread count must not change the semantic hash
  auto j2 = j;
  j2["threads"] = 1;
  REQUIRE(pipeline_config_from_json(j2).semantic_hash() == cfg.semantic_hash());
  auto j3 = j;
  j3["seed"] = 124;
  REQUIRE(pipeline_config_from_json(j3).semantic_hash() != cfg.semantic_hash());

  nlohmann::json bad = {{"tau", 1.5}};
  REQUIRE_THROWS_AS(pipeline_config_from_json(bad), validation_error);
}

TEST_CASE("run accepts precomputed feature tables and reproduces extraction") {
  auto spec = small_spec();
  spec.n_discovery = 8;
  spec.n_test = 5;
  spec.grid = 22;
  spec.n_raters = 2;
  const auto cohort = make_synthetic_cohort(spec, 19);
  const auto dir = fs::temp_directory_path() / "radstack_pretab_test";
  fs::remove_all(dir);
  const auto [disc, test] = write_synthetic_cohort(cohort, dir);

  PipelineConfig cfg;
  cfg.discovery_manifest = disc;
  cfg.test_manifest = test;
  cfg.master_seed = 4;
  cfg.n_forests = 4;
  cfg.forest.n_estimators = 20;
  cfg.n_features = 3;
  cfg.report_uauc = false;

  // reference: extraction inside the run
  auto inputs_a = build_pipeline_inputs(cfg);
  const auto rep_a = run_pipeline(cfg, inputs_a);

  // same run from tables written to disk
  write_feature_csv(inputs_a.discovery, dir / "disc.csv");
  for (const auto& [scheme, table] : inputs_a.test_tables)
    write_feature_csv(table, dir / ("test_" + scheme + ".csv"));
  auto cfg_tab = cfg;
  cfg_tab.discovery_features = dir / "disc.csv";
  for (const auto& scheme : inputs_a.scheme_names)
    cfg_tab.test_features[scheme] = dir / ("test_" + scheme + ".csv");
  auto inputs_b = build_pipeline_inputs(cfg_tab);
  const auto rep_b = run_pipeline(cfg_tab, inputs_b);

  REQUIRE(run_report_to_json(rep_a)["experiments"] == run_report_to_json(rep_b)["experiments"]);
}

TEST_CASE("stage failures carry their stage name") {
  const auto cohort = make_synthetic_cohort(small_spec(), 3);
  auto cfg = small_config();
  cfg.n_features = 100000;  // more than the pool can supply
  auto inputs = inputs_from_cohort(cohort, cfg);
  REQUIRE_THROWS_WITH(run_pipeline(cfg, inputs), Catch::Matchers::ContainsSubstring("stage 'mad-filter'"));
}

TEST_CASE("written synthetic cohort round-trips through manifests") {
  auto spec = small_spec();
  spec.n_discovery = 3;
  spec.n_test = 2;
  spec.grid = 20;
  spec.n_raters = 2;
  const auto cohort = make_synthetic_cohort(spec, 31);
  const auto dir = fs::temp_directory_path() / "radstack_synth_test";
  fs::remove_all(dir);
  const auto [disc_path, test_path] = write_synthetic_cohort(cohort, dir);

  const auto disc = load_manifest(disc_path);
  REQUIRE(disc.subjects.size() == 3);
  const auto s0 = load_subject(disc.subjects[0]);
  REQUIRE(s0.channels.at("T1").dims == Dims{20, 20, 20});
  REQUIRE(s0.masks.count("truth") == 1);

  const auto test = load_manifest(test_path);
  REQUIRE(test.subjects.size() == 2);
  REQUIRE(test.subjects[0].masks.size() == 3);  // truth + 2 raters
  REQUIRE(test.subjects[0].label.has_value());

  // volumes round-trip within f32 precision of the in-memory cohort
  const auto& mem = cohort.subjects[0].data.channels.at("T1");
  const auto& disk = s0.channels.at("T1");
  for (std::size_t i = 0; i < mem.values.size(); ++i)
    REQUIRE(disk.values[i] == Catch::Approx(mem.values[i]).margin(1e-6));
}
