#pragma once

#include <cmath>
#include <vector>

#include "radstack/common.hpp"
#include "radstack/volume.hpp"

namespace radstack {

struct StapleResult {
  std::vector<double> consensus_w;     // per-voxel posterior P(true = 1)
  std::vector<double> sensitivity_p;   // per rater
  std::vector<double> specificity_q;   // per rater
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // all-empty input
  std::vector<double> log_likelihood;  // per iteration, non-decreasing

  RegionMask consensus_mask(const Dims& dims, const Spacing& sp, RegionId id) const {
    RegionMask m;
    m.dims = dims;
    m.spacing_mm = sp;
    m.region_id = id;
    m.voxels.resize(consensus_w.size());
    for (std::size_t i = 0; i < consensus_w.size(); ++i)
      m.voxels[i] = consensus_w[i] >= 0.5 ? 1 : 0;  // ties map to foreground
    return m;
  }
};

/// Binary STAPLE by EM with a stationary global prior. Init p_j = q_j = 0.99,
/// prior = mean foreground fraction; E-step gives the consensus posterior W,
/// M-step re-estimates per-rater sensitivity/specificity. Stops when
/// max |dW| < tol or max_iter.
inline StapleResult staple_binary(const std::vector<RegionMask>& masks, int max_iter = 100,
                                  double tol = 1e-6) {
  if (masks.size() < 2) throw validation_error("staple_binary: need at least 2 raters");
  const Dims dims = masks[0].dims;
  const Spacing sp = masks[0].spacing_mm;
  for (const auto& m : masks)
    if (m.dims != dims || m.spacing_mm != sp) throw validation_error("staple_binary: geometry mismatch");

  const std::size_t n = masks[0].voxels.size();
  const std::size_t j_count = masks.size();

  StapleResult res;
  res.sensitivity_p.assign(j_count, 0.99);
  res.specificity_q.assign(j_count, 0.99);
  res.consensus_w.assign(n, 0.0);

  double prior = 0;
  for (const auto& m : masks) prior += static_cast<double>(m.count());
  prior /= (static_cast<double>(j_count) * static_cast<double>(n));
  if (prior == 0) {
    res.degenerate = true;
    res.converged = true;
    return res;
  }

  std::vector<double> w_prev(n, 0.0);
  for (int iter = 1; iter <= max_iter; ++iter) {
    // E-step
    double ll = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double a = prior, b = 1.0 - prior;
      for (std::size_t j = 0; j < j_count; ++j) {
        const bool marked = masks[j].voxels[i] != 0;
        a *= marked ? res.sensitivity_p[j] : 1.0 - res.sensitivity_p[j];
        b *= marked ? 1.0 - res.specificity_q[j] : res.specificity_q[j];
      }
      const double denom = a + b;
      res.consensus_w[i] = denom > 0 ? a / denom : 0.0;
      ll += std::log(std::max(denom, 1e-300));
    }
    res.log_likelihood.push_back(ll);

    // M-step
    double w_sum = 0;
    for (double w : res.consensus_w) w_sum += w;
    const double w_neg = static_cast<double>(n) - w_sum;
    for (std::size_t j = 0; j < j_count; ++j) {
      double p_num = 0, q_num = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (masks[j].voxels[i])
          p_num += res.consensus_w[i];
        else
          q_num += 1.0 - res.consensus_w[i];
      }
      if (w_sum > 0) res.sensitivity_p[j] = p_num / w_sum;
      if (w_neg > 0) res.specificity_q[j] = q_num / w_neg;
    }

    double max_dw = 0;
    for (std::size_t i = 0; i < n; ++i) max_dw = std::max(max_dw, std::abs(res.consensus_w[i] - w_prev[i]));
    res.iterations = iter;
    if (max_dw < tol) {
      res.converged = true;
      break;
    }
    w_prev = res.consensus_w;
  }
  return res;
}

struct MultiRegionFusion {
  LabelMask fused;
  StapleResult wt, tc, enc;
};

/// Runs binary STAPLE independently on the derived WT/TC/ENC stacks, enforces
/// the nesting TC' = TC & WT, ENC' = ENC & TC', and emits BraTS labels
/// (ENC'->4, TC'\ENC'->1, WT\TC'->2).
inline MultiRegionFusion fuse_multiregion(const std::vector<LabelMask>& labels, int max_iter = 100,
                                          double tol = 1e-6) {
  if (labels.size() < 2) throw validation_error("fuse_multiregion: need at least 2 raters");
  const Dims dims = labels[0].dims;
  const Spacing sp = labels[0].spacing_mm;
  for (const auto& m : labels)
    if (m.dims != dims || m.spacing_mm != sp) throw validation_error("fuse_multiregion: geometry mismatch");

  std::vector<RegionMask> wt_stack, tc_stack, enc_stack;
  for (const auto& m : labels) {
    auto regions = derive_regions(m);
    wt_stack.push_back(std::move(regions.wt));
    tc_stack.push_back(std::move(regions.tc));
    enc_stack.push_back(std::move(regions.enc));
  }

  MultiRegionFusion out;
  out.wt = staple_binary(wt_stack, max_iter, tol);
  out.tc = staple_binary(tc_stack, max_iter, tol);
  out.enc = staple_binary(enc_stack, max_iter, tol);

  const auto wt = out.wt.consensus_mask(dims, sp, RegionId::WT);
  const auto tc = out.tc.consensus_mask(dims, sp, RegionId::TC);
  const auto enc = out.enc.consensus_mask(dims, sp, RegionId::ENC);

  out.fused.dims = dims;
  out.fused.spacing_mm = sp;
  out.fused.labels.assign(wt.voxels.size(), 0);
  for (std::size_t i = 0; i < wt.voxels.size(); ++i) {
    const bool in_wt = wt.voxels[i] != 0;
    const bool in_tc = in_wt && tc.voxels[i] != 0;    // nesting: TC' = TC & WT
    const bool in_enc = in_tc && enc.voxels[i] != 0;  // ENC' = ENC & TC'
    if (in_enc)
      out.fused.labels[i] = 4;
    else if (in_tc)
      out.fused.labels[i] = 1;
    else if (in_wt)
      out.fused.labels[i] = 2;
  }
  return out;
}

}  // namespace radstack
