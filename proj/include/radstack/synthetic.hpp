#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radstack/common.hpp"
#include "radstack/extract.hpp"
#include "radstack/manifest.hpp"
#include "radstack/volume.hpp"

namespace radstack {

/// Knobs of the planted-signal synthetic cohort. The robust signal is an
/// intensity statistic of the big region: the label shifts T1Gd inside the
/// whole tumor, which boundary jitter barely moves. The unstable signal is a
/// geometry statistic of the small region: the label scales the enhancing
/// core, whose size raters rescale and displace heavily, so every
/// ENC-mask-derived feature decorrelates across raters at test time while
/// staying strongly discriminative on the clean discovery masks.
struct SyntheticSpec {
  int n_discovery = 40;
  int n_test = 20;
  int grid = 48;
  double spacing = 1.0;
  int n_raters = 7;
  Task task = Task::IDH;
  double voxel_noise = 0.08;
  double robust_effect = 0.5;    // T1Gd shift inside WT for the top class
  double unstable_effect = 0.5;  // relative ENC radius gap for the top class
  double subject_jitter = 0.5;   // spread of the per-subject intensity offset
  double wt_scale_noise = 0.03;
  double tc_scale_noise = 0.05;
  double enc_scale_noise = 0.25;
  int wt_shift_voxels = 1;
  int enc_shift_voxels = 3;

  void validate() const {
    if (grid < 16) throw validation_error("synthetic: grid too small");
    if (n_discovery < 2 || n_test < 1) throw validation_error("synthetic: cohort too small");
    if (n_raters < 1) throw validation_error("synthetic: need at least 1 rater");
  }
};

struct SyntheticSubject {
  SubjectData data;      // channels + masks ("truth" and, for test, r1..rJ)
  int label = 0;
  bool is_test = false;
};

struct SyntheticCohort {
  SyntheticSpec spec;
  std::vector<SyntheticSubject> subjects;  // discovery first, then test
};

namespace detail {

struct Ellipsoid {
  double cx, cy, cz;
  double rx, ry, rz;

  bool contains(int x, int y, int z) const {
    const double dx = (x - cx) / rx, dy = (y - cy) / ry, dz = (z - cz) / rz;
    return dx * dx + dy * dy + dz * dz <= 1.0;
  }
};

inline LabelMask nested_label_mask(const Dims& dims, const Spacing& sp, const Ellipsoid& wt,
                                   const Ellipsoid& tc, const Ellipsoid& enc) {
  LabelMask m;
  m.dims = dims;
  m.spacing_mm = sp;
  m.labels.assign(dims.count(), 0);
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        if (!wt.contains(x, y, z)) continue;
        const bool in_tc = tc.contains(x, y, z);
        const bool in_enc = in_tc && enc.contains(x, y, z);
        m.at(x, y, z) = in_enc ? 4 : in_tc ? 1 : 2;
      }
  return m;
}

}  // namespace detail

/// Fully seeded generation of ellipsoidal 3-label tumors, label-correlated
/// region intensities, and per-rater boundary perturbations.
inline SyntheticCohort make_synthetic_cohort(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticCohort cohort;
  cohort.spec = spec;
  const int g = spec.grid;
  const Dims dims{g, g, g};
  const Spacing sp{spec.spacing, spec.spacing, spec.spacing};
  const int n_total = spec.n_discovery + spec.n_test;
  const int n_classes = spec.task == Task::IDH ? 2 : 3;

  // balanced labels, shuffled deterministically
  std::vector<int> labels(static_cast<std::size_t>(n_total));
  for (int i = 0; i < n_total; ++i) labels[static_cast<std::size_t>(i)] = i % n_classes;
  {
    Rng rng(mix_seed(seed, 0xBA1ABCE));
    rng.shuffle(labels);
  }

  for (int s = 0; s < n_total; ++s) {
    Rng rng(mix_seed(seed, 0x5EED0000ULL + static_cast<std::uint64_t>(s)));
    SyntheticSubject subject;
    subject.label = labels[static_cast<std::size_t>(s)];
    subject.is_test = s >= spec.n_discovery;
    subject.data.id = (subject.is_test ? "test_" : "disc_") + std::to_string(s);

    const double y_norm = static_cast<double>(subject.label) / static_cast<double>(n_classes - 1);
    const double half = g / 2.0;

    detail::Ellipsoid brain{half, half, half, 0.44 * g, 0.42 * g, 0.43 * g};
    const double cx = half + (rng.next_double() - 0.5) * g / 6.0;
    const double cy = half + (rng.next_double() - 0.5) * g / 6.0;
    const double cz = half + (rng.next_double() - 0.5) * g / 6.0;
    auto radius = [&] { return g * (0.20 + 0.05 * rng.next_double()); };
    detail::Ellipsoid wt{cx, cy, cz, radius(), radius(), radius()};
    detail::Ellipsoid tc{cx, cy, cz, 0.62 * wt.rx, 0.62 * wt.ry, 0.62 * wt.rz};
    // the label controls the size of the enhancing core
    const double enc_factor =
        0.32 * (1.0 + spec.unstable_effect * y_norm) * (1.0 + 0.06 * (rng.next_double() - 0.5));
    detail::Ellipsoid enc{cx, cy, cz, enc_factor * wt.rx, enc_factor * wt.ry, enc_factor * wt.rz};

    subject.data.masks["truth"] = detail::nested_label_mask(dims, sp, wt, tc, enc);

    const double robust_shift = spec.robust_effect * y_norm + spec.subject_jitter * (rng.next_double() - 0.5);

    for (const char* ch : {"T1", "T1Gd", "T2", "FLAIR"}) {
      VolumeGrid vol = make_volume(dims, sp);
      const bool is_t1gd = std::string(ch) == "T1Gd";
      const bool is_t1 = std::string(ch) == "T1";
      const bool is_flair = std::string(ch) == "FLAIR";
      for (int z = 0; z < g; ++z)
        for (int y = 0; y < g; ++y)
          for (int x = 0; x < g; ++x) {
            if (!brain.contains(x, y, z)) continue;  // exact zero outside the brain
            double v = 1.0 + spec.voxel_noise * rng.next_gauss();
            if (wt.contains(x, y, z)) {
              v += 0.5;
              if (is_flair) v += 0.3;
              if (is_t1gd) v += robust_shift;
            }
            if (tc.contains(x, y, z) && is_t1) v += 0.2;
            vol.at(x, y, z) = v;
          }
      subject.data.channels[ch] = std::move(vol);
    }

    if (subject.is_test) {
      for (int r = 0; r < spec.n_raters; ++r) {
        Rng rr(mix_seed(seed, 0x0A7E0000ULL + static_cast<std::uint64_t>(s) * 64 + static_cast<std::uint64_t>(r)));
        auto jitter_scale = [&](double noise) { return std::max(0.3, 1.0 + noise * rr.next_gauss()); };
        auto jitter_shift = [&](int max_shift) {
          return max_shift > 0 ? static_cast<double>(static_cast<std::int64_t>(rr.next_below(
                                     static_cast<std::uint64_t>(2 * max_shift + 1)))) - max_shift
                               : 0.0;
        };
        detail::Ellipsoid wtr = wt;
        wtr.cx += jitter_shift(spec.wt_shift_voxels);
        wtr.cy += jitter_shift(spec.wt_shift_voxels);
        wtr.cz += jitter_shift(spec.wt_shift_voxels);
        const double ws = jitter_scale(spec.wt_scale_noise);
        wtr.rx *= ws;
        wtr.ry *= ws;
        wtr.rz *= ws;
        detail::Ellipsoid tcr = tc;
        const double ts = jitter_scale(spec.tc_scale_noise);
        tcr.rx *= ts;
        tcr.ry *= ts;
        tcr.rz *= ts;
        detail::Ellipsoid encr = enc;
        encr.cx += jitter_shift(spec.enc_shift_voxels);
        encr.cy += jitter_shift(spec.enc_shift_voxels);
        encr.cz += jitter_shift(spec.enc_shift_voxels);
        const double es = jitter_scale(spec.enc_scale_noise);
        encr.rx *= es;
        encr.ry *= es;
        encr.rz *= es;
        subject.data.masks["r" + std::to_string(r + 1)] = detail::nested_label_mask(dims, sp, wtr, tcr, encr);
      }
    }
    cohort.subjects.push_back(std::move(subject));
  }
  return cohort;
}

/// Writes the cohort as rawvol files plus manifest.json under out_dir;
/// returns the manifest paths {discovery, test}.
inline std::pair<std::filesystem::path, std::filesystem::path> write_synthetic_cohort(
    const SyntheticCohort& cohort, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  nlohmann::ordered_json disc, test;
  disc["subjects"] = nlohmann::ordered_json::array();
  test["subjects"] = nlohmann::ordered_json::array();

  for (const auto& subject : cohort.subjects) {
    const fs::path sub_dir = out_dir / subject.data.id;
    fs::create_directories(sub_dir);
    nlohmann::ordered_json js;
    js["id"] = subject.data.id;
    nlohmann::ordered_json vols = nlohmann::ordered_json::object();
    for (const auto& [ch, vol] : subject.data.channels) {
      const std::string rel = subject.data.id + "/" + ch + ".rawvol";
      write_volume(vol, out_dir / rel);
      vols[ch] = rel;
    }
    js["volumes"] = std::move(vols);
    nlohmann::ordered_json masks = nlohmann::ordered_json::object();
    for (const auto& [rater, mask] : subject.data.masks) {
      const std::string rel = subject.data.id + "/mask_" + rater + ".rawvol";
      write_label_mask(mask, out_dir / rel);
      masks[rater] = rel;
    }
    js["masks"] = std::move(masks);
    js["label"] = {{"task", to_token(cohort.spec.task)}, {"value", subject.label}};
    (subject.is_test ? test : disc)["subjects"].push_back(std::move(js));
  }

  const fs::path disc_path = out_dir / "discovery_manifest.json";
  const fs::path test_path = out_dir / "test_manifest.json";
  std::ofstream(disc_path) << disc.dump(2) << "\n";
  std::ofstream(test_path) << test.dump(2) << "\n";
  return {disc_path, test_path};
}

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  s.n_discovery = j.value("n_discovery", s.n_discovery);
  s.n_test = j.value("n_test", s.n_test);
  s.grid = j.value("grid", s.grid);
  s.spacing = j.value("spacing", s.spacing);
  s.n_raters = j.value("n_raters", s.n_raters);
  if (j.contains("task")) s.task = parse_task(j["task"].get<std::string>());
  s.voxel_noise = j.value("voxel_noise", s.voxel_noise);
  s.robust_effect = j.value("robust_effect", s.robust_effect);
  s.unstable_effect = j.value("unstable_effect", s.unstable_effect);
  s.subject_jitter = j.value("subject_jitter", s.subject_jitter);
  s.wt_scale_noise = j.value("wt_scale_noise", s.wt_scale_noise);
  s.tc_scale_noise = j.value("tc_scale_noise", s.tc_scale_noise);
  s.enc_scale_noise = j.value("enc_scale_noise", s.enc_scale_noise);
  s.wt_shift_voxels = j.value("wt_shift_voxels", s.wt_shift_voxels);
  s.enc_shift_voxels = j.value("enc_shift_voxels", s.enc_shift_voxels);
  return s;
}

}  // namespace radstack
