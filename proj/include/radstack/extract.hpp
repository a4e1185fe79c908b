#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radstack/common.hpp"
#include "radstack/descriptors.hpp"
#include "radstack/filters.hpp"
#include "radstack/firstorder.hpp"
#include "radstack/manifest.hpp"
#include "radstack/matrix.hpp"
#include "radstack/shape.hpp"
#include "radstack/texture.hpp"
#include "radstack/volume.hpp"

namespace radstack {

struct ExtractConfig {
  DiscretizeScheme scheme;
  bool include_age = false;
  std::array<double, 2> log_sigmas_mm = {1.0, 3.0};
};

/// One subject's per-descriptor values, aligned with enumerate_descriptors.
struct FeatureRow {
  std::string subject_id;
  std::vector<double> values;
};

struct SubjectData {
  std::string id;
  std::map<std::string, VolumeGrid> channels;  // channel token -> volume
  std::map<std::string, LabelMask> masks;      // rater name -> mask
  std::optional<double> age;
};

inline SubjectData load_subject(const SubjectEntry& entry) {
  SubjectData s;
  s.id = entry.id;
  s.age = entry.age;
  for (const auto& [ch, path] : entry.volumes) s.channels[ch] = read_volume(path);
  for (const auto& [rater, path] : entry.masks) s.masks[rater] = read_label_mask(path);
  return s;
}

/// The 11 filtered versions of each channel plus the whole-brain mesh
/// measures; computed once per subject and shared across raters (all of it
/// depends only on the images, never on a mask).
struct FilteredChannels {
  // [channel index][filter index] in the channel/filter enumeration order
  std::vector<std::vector<VolumeGrid>> grids;
  double brain_mesh_volume = kNaN;
  double brain_mesh_area = kNaN;
};

namespace detail {

inline const std::array<const char*, 4>& channel_tokens() {
  static const std::array<const char*, 4> t = {"T1", "T1Gd", "T2", "FLAIR"};
  return t;
}

struct BBox {
  int x0 = 0, y0 = 0, z0 = 0;
  Dims dims;
};

inline BBox mask_bbox(const RegionMask& m) {
  const Dims d = m.dims;
  int x0 = d.nx, y0 = d.ny, z0 = d.nz, x1 = -1, y1 = -1, z1 = -1;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        if (m.at(x, y, z)) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          z0 = std::min(z0, z);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
          z1 = std::max(z1, z);
        }
  BBox box;
  box.x0 = x0;
  box.y0 = y0;
  box.z0 = z0;
  box.dims = Dims{x1 - x0 + 1, y1 - y0 + 1, z1 - z0 + 1};
  return box;
}

inline RegionMask crop_mask(const RegionMask& m, const BBox& box) {
  RegionMask out;
  out.dims = box.dims;
  out.spacing_mm = m.spacing_mm;
  out.region_id = m.region_id;
  out.voxels.resize(box.dims.count());
  for (int z = 0; z < box.dims.nz; ++z)
    for (int y = 0; y < box.dims.ny; ++y)
      for (int x = 0; x < box.dims.nx; ++x)
        out.voxels[voxel_index(box.dims, x, y, z)] = m.at(box.x0 + x, box.y0 + y, box.z0 + z) ? 1 : 0;
  return out;
}

inline VolumeGrid crop_volume(const VolumeGrid& v, const BBox& box) {
  VolumeGrid out = make_volume(box.dims, v.spacing_mm);
  for (int z = 0; z < box.dims.nz; ++z)
    for (int y = 0; y < box.dims.ny; ++y)
      for (int x = 0; x < box.dims.nx; ++x)
        out.at(x, y, z) = v.at(box.x0 + x, box.y0 + y, box.z0 + z);
  return out;
}

inline void check_geometry(const SubjectData& s) {
  const VolumeGrid* ref = nullptr;
  for (const auto& tok : channel_tokens()) {
    auto it = s.channels.find(tok);
    if (it == s.channels.end())
      throw validation_error("subject '" + s.id + "': missing channel " + std::string(tok));
    if (!ref) {
      ref = &it->second;
    } else if (it->second.dims != ref->dims || it->second.spacing_mm != ref->spacing_mm) {
      throw validation_error("subject '" + s.id + "': channel geometry mismatch at " + std::string(tok));
    }
  }
  for (const auto& [rater, mask] : s.masks)
    if (mask.dims != ref->dims || mask.spacing_mm != ref->spacing_mm)
      throw validation_error("subject '" + s.id + "': mask geometry mismatch for rater " + rater);
}

}  // namespace detail

inline FilteredChannels compute_filtered_channels(const SubjectData& s, const ExtractConfig& cfg = {}) {
  detail::check_geometry(s);
  FilteredChannels out;
  out.grids.resize(4);
  for (std::size_t c = 0; c < 4; ++c) {
    const VolumeGrid& vol = s.channels.at(detail::channel_tokens()[c]);
    auto& slot = out.grids[c];
    slot.reserve(11);
    slot.push_back(vol);  // original
    auto bands = wavelet_subbands(vol);
    for (const char* b : {"LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH"})
      slot.push_back(std::move(bands.at(b)));
    slot.push_back(log_filter(vol, cfg.log_sigmas_mm[0]));
    slot.push_back(log_filter(vol, cfg.log_sigmas_mm[1]));
  }
  return out;
}

inline void fill_brain_measures(const SubjectData& s, FilteredChannels& filt);

/// Mask of voxels where any channel is nonzero; stands in for the whole brain.
inline RegionMask brain_mask(const SubjectData& s) {
  const VolumeGrid& ref = s.channels.begin()->second;
  RegionMask m;
  m.dims = ref.dims;
  m.spacing_mm = ref.spacing_mm;
  m.region_id = RegionId::WT;
  m.voxels.assign(ref.values.size(), 0);
  for (const auto& [tok, vol] : s.channels)
    for (std::size_t i = 0; i < vol.values.size(); ++i)
      if (vol.values[i] != 0) m.voxels[i] = 1;
  return m;
}

inline void fill_brain_measures(const SubjectData& s, FilteredChannels& filt) {
  const auto bm = brain_mask(s);
  if (bm.count() == 0) return;
  auto bf = brain_shape(bm);
  filt.brain_mesh_volume = bf.at("MeshVolume");
  filt.brain_mesh_area = bf.at("SurfaceArea");
}

/// Fills a subject's full feature row for one rater's mask. Empty derived
/// regions produce NaN for every descriptor of that region.
inline FeatureRow extract_subject(const SubjectData& subject, const std::string& rater,
                                  const ExtractConfig& cfg = {},
                                  const FilteredChannels* precomputed = nullptr) {
  detail::check_geometry(subject);
  auto mask_it = subject.masks.find(rater);
  if (mask_it == subject.masks.end())
    throw validation_error("subject '" + subject.id + "': no mask for rater '" + rater + "'");

  FilteredChannels local;
  const FilteredChannels* filt = precomputed;
  if (!filt) {
    local = compute_filtered_channels(subject, cfg);
    fill_brain_measures(subject, local);
    filt = &local;
  }

  const std::size_t n_desc = cfg.include_age ? 11130 : 11129;
  FeatureRow row;
  row.subject_id = subject.id;
  row.values.assign(n_desc, kNaN);

  const auto regions = derive_regions(mask_it->second);
  const std::array<const RegionMask*, 3> region_masks = {&regions.wt, &regions.tc, &regions.enc};

  // shape per region: descriptor layout is 13 x 3 regions, then 2 brain
  for (std::size_t r = 0; r < 3; ++r) {
    if (region_masks[r]->count() == 0) continue;
    auto sf = shape_features(*region_masks[r]);
    for (std::size_t k = 0; k < shape_names().size(); ++k)
      row.values[r * 13 + k] = sf.at(shape_names()[k]);
  }
  row.values[39] = filt->brain_mesh_volume;
  row.values[40] = filt->brain_mesh_area;

  // intensity features: ((region*4 + channel)*11 + filter)*84 block after 41.
  // All work runs on the region's bounding box; voxels outside it are outside
  // the ROI, so the crop cannot change any value.
  for (std::size_t r = 0; r < 3; ++r) {
    if (region_masks[r]->count() == 0) continue;
    const auto box = detail::mask_bbox(*region_masks[r]);
    const RegionMask cropped_mask = detail::crop_mask(*region_masks[r], box);
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t f = 0; f < 11; ++f) {
        const VolumeGrid grid = detail::crop_volume(filt->grids[c][f], box);
        const auto disc = discretize(grid, cropped_mask, cfg.scheme);
        const std::size_t base = 41 + ((r * 4 + c) * 11 + f) * 84;
        auto fo = first_order(grid, cropped_mask, disc);
        for (std::size_t k = 0; k < firstorder_names().size(); ++k)
          row.values[base + k] = fo.at(firstorder_names()[k]);
        auto tex = texture_features(disc);
        std::size_t off = base + 17;
        for (const auto& n : glcm_names()) row.values[off++] = tex["glcm"].at(n);
        for (const auto& n : glrlm_names()) row.values[off++] = tex["glrlm"].at(n);
        for (const auto& n : glszm_names()) row.values[off++] = tex["glszm"].at(n);
        for (const auto& n : gldm_names()) row.values[off++] = tex["gldm"].at(n);
        for (const auto& n : ngtdm_names()) row.values[off++] = tex["ngtdm"].at(n);
      }
  }

  if (cfg.include_age) row.values[11129] = subject.age ? *subject.age : kNaN;
  return row;
}

/// Extracts a whole cohort into a FeatureMatrix for one rater. Subjects run
/// in parallel; the row order follows the manifest.
inline FeatureMatrix extract_cohort(const CohortManifest& manifest, const std::string& rater,
                                    const ExtractConfig& cfg = {}, int threads = 1) {
  FeatureMatrix out;
  out.descriptors = enumerate_descriptors(cfg.include_age);
  out.subject_ids.resize(manifest.subjects.size());
  out.values.assign(manifest.subjects.size() * out.descriptors.size(), kNaN);
  parallel_for(manifest.subjects.size(), threads, [&](std::size_t i) {
    const auto subject = load_subject(manifest.subjects[i]);
    const auto row = extract_subject(subject, rater, cfg);
    out.subject_ids[i] = row.subject_id;
    std::copy(row.values.begin(), row.values.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * out.cols()));
  });
  return out;
}

/// Extracts every rater's table in one pass, sharing the per-subject filtered
/// channels. Returns rater name -> FeatureMatrix.
inline std::map<std::string, FeatureMatrix> extract_cohort_all_raters(const CohortManifest& manifest,
                                                                      const ExtractConfig& cfg = {},
                                                                      int threads = 1) {
  std::vector<std::string> raters = manifest.rater_names();
  std::map<std::string, FeatureMatrix> out;
  const auto descs = enumerate_descriptors(cfg.include_age);
  for (const auto& r : raters) {
    out[r].descriptors = descs;
    out[r].subject_ids.resize(manifest.subjects.size());
    out[r].values.assign(manifest.subjects.size() * descs.size(), kNaN);
  }
  parallel_for(manifest.subjects.size(), threads, [&](std::size_t i) {
    const auto subject = load_subject(manifest.subjects[i]);
    auto filtered = compute_filtered_channels(subject, cfg);
    fill_brain_measures(subject, filtered);
    for (const auto& r : raters) {
      auto& m = out.at(r);
      m.subject_ids[i] = subject.id;
      if (!subject.masks.count(r)) continue;  // row stays NaN for absent raters
      const auto row = extract_subject(subject, r, cfg, &filtered);
      std::copy(row.values.begin(), row.values.end(), m.values.begin() + static_cast<std::ptrdiff_t>(i * m.cols()));
    }
  });
  return out;
}

}  // namespace radstack
