#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "radstack/common.hpp"

namespace radstack {

enum class Region { WT, TC, ENC, BRAIN, NONE };
enum class Channel { T1, T1Gd, T2, FLAIR, NONE };
enum class Family { firstorder, shape, glcm, glrlm, glszm, gldm, ngtdm, clinical };

inline const char* to_token(Region r) {
  switch (r) {
    case Region::WT: return "WT";
    case Region::TC: return "TC";
    case Region::ENC: return "ENC";
    case Region::BRAIN: return "BRAIN";
    case Region::NONE: return "NONE";
  }
  return "?";
}

inline const char* to_token(Channel c) {
  switch (c) {
    case Channel::T1: return "T1";
    case Channel::T1Gd: return "T1Gd";
    case Channel::T2: return "T2";
    case Channel::FLAIR: return "FLAIR";
    case Channel::NONE: return "NONE";
  }
  return "?";
}

inline const char* to_token(Family f) {
  switch (f) {
    case Family::firstorder: return "firstorder";
    case Family::shape: return "shape";
    case Family::glcm: return "glcm";
    case Family::glrlm: return "glrlm";
    case Family::glszm: return "glszm";
    case Family::gldm: return "gldm";
    case Family::ngtdm: return "ngtdm";
    case Family::clinical: return "clinical";
  }
  return "?";
}

/// Filter channel tokens: original, wavelet-LLL..wavelet-HHH, log-sigma-1,
/// log-sigma-3, NONE. Wavelet band letters are ordered (x, y, z).
inline const std::array<std::string, 11>& filter_tokens() {
  static const std::array<std::string, 11> t = {
      "original",     "wavelet-LLL", "wavelet-LLH", "wavelet-LHL", "wavelet-LHH", "wavelet-HLL",
      "wavelet-HLH",  "wavelet-HHL", "wavelet-HHH", "log-sigma-1", "log-sigma-3"};
  return t;
}

inline const std::array<std::string, 17>& firstorder_names() {
  static const std::array<std::string, 17> n = {
      "Energy",       "Entropy",  "Minimum",  "Maximum",  "Percentile10",
      "Percentile90", "Mean",     "Median",   "InterquartileRange",
      "Range",        "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation",
      "RootMeanSquared", "Skewness", "Kurtosis", "Variance", "Uniformity"};
  return n;
}

inline const std::array<std::string, 13>& shape_names() {
  static const std::array<std::string, 13> n = {
      "MeshVolume",       "SurfaceArea",         "SurfaceAreaToVolumeRatio",
      "Sphericity",       "Maximum3DDiameter",   "Maximum2DDiameterSlice",
      "Maximum2DDiameterColumn", "Maximum2DDiameterRow", "MajorAxisLength",
      "MinorAxisLength",  "LeastAxisLength",     "Elongation", "Flatness"};
  return n;
}

inline const std::array<std::string, 2>& brain_shape_names() {
  static const std::array<std::string, 2> n = {"MeshVolume", "SurfaceArea"};
  return n;
}

inline const std::array<std::string, 21>& glcm_names() {
  static const std::array<std::string, 21> n = {
      "Autocorrelation", "JointAverage", "ClusterProminence", "ClusterShade", "ClusterTendency",
      "Contrast",        "Correlation",  "DifferenceAverage", "DifferenceEntropy",
      "DifferenceVariance", "JointEnergy", "JointEntropy", "Imc1", "Imc2", "Mcc",
      "Idmn",            "Idn",          "InverseVariance",  "MaximumProbability",
      "SumEntropy",      "SumSquares"};
  return n;
}

inline const std::array<std::string, 14>& glrlm_names() {
  static const std::array<std::string, 14> n = {
      "ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformityNormalized",
      "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance",
      "RunVariance", "RunEntropy", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
      "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis",
      "LongRunLowGrayLevelEmphasis", "LongRunHighGrayLevelEmphasis"};
  return n;
}

inline const std::array<std::string, 14>& glszm_names() {
  static const std::array<std::string, 14> n = {
      "SmallAreaEmphasis", "LargeAreaEmphasis", "GrayLevelNonUniformityNormalized",
      "SizeZoneNonUniformityNormalized", "ZonePercentage", "GrayLevelVariance",
      "ZoneVariance", "ZoneEntropy", "LowGrayLevelZoneEmphasis", "HighGrayLevelZoneEmphasis",
      "SmallAreaLowGrayLevelEmphasis", "SmallAreaHighGrayLevelEmphasis",
      "LargeAreaLowGrayLevelEmphasis", "LargeAreaHighGrayLevelEmphasis"};
  return n;
}

inline const std::array<std::string, 13>& gldm_names() {
  static const std::array<std::string, 13> n = {
      "SmallDependenceEmphasis", "LargeDependenceEmphasis", "GrayLevelNonUniformity",
      "DependenceNonUniformityNormalized", "GrayLevelVariance", "DependenceVariance",
      "DependenceEntropy", "LowGrayLevelEmphasis", "HighGrayLevelEmphasis",
      "SmallDependenceLowGrayLevelEmphasis", "SmallDependenceHighGrayLevelEmphasis",
      "LargeDependenceLowGrayLevelEmphasis", "LargeDependenceHighGrayLevelEmphasis"};
  return n;
}

inline const std::array<std::string, 5>& ngtdm_names() {
  static const std::array<std::string, 5> n = {"Coarseness", "Contrast", "Busyness", "Complexity", "Strength"};
  return n;
}

/// Structured feature identifier. Canonical string form is
/// `region:channel:filter:family:name` and round-trips through parse/print.
struct FeatureDescriptor {
  Region region = Region::NONE;
  Channel channel = Channel::NONE;
  std::string filter = "NONE";
  Family family = Family::firstorder;
  std::string name;

  bool operator==(const FeatureDescriptor&) const = default;

  std::string str() const {
    std::string s;
    s.reserve(48);
    s += to_token(region);
    s += ':';
    s += to_token(channel);
    s += ':';
    s += filter;
    s += ':';
    s += to_token(family);
    s += ':';
    s += name;
    return s;
  }
};

namespace detail {

template <typename Enum, typename TokenFn>
inline Enum parse_enum_token(std::string_view tok, TokenFn fn, std::initializer_list<Enum> all,
                             const char* what) {
  for (Enum e : all)
    if (tok == fn(e)) return e;
  throw validation_error(std::string("unknown ") + what + " token '" + std::string(tok) + "'");
}

}  // namespace detail

inline FeatureDescriptor parse_descriptor(std::string_view s) {
  std::array<std::string_view, 5> parts;
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const auto pos = s.find(':', start);
    if (pos == std::string_view::npos) throw validation_error("bad descriptor '" + std::string(s) + "'");
    parts[i] = s.substr(start, pos - start);
    start = pos + 1;
  }
  parts[4] = s.substr(start);
  FeatureDescriptor d;
  d.region = detail::parse_enum_token<Region>(
      parts[0], [](Region r) { return to_token(r); },
      {Region::WT, Region::TC, Region::ENC, Region::BRAIN, Region::NONE}, "region");
  d.channel = detail::parse_enum_token<Channel>(
      parts[1], [](Channel c) { return to_token(c); },
      {Channel::T1, Channel::T1Gd, Channel::T2, Channel::FLAIR, Channel::NONE}, "channel");
  d.filter = std::string(parts[2]);
  if (d.filter != "NONE") {
    bool known = false;
    for (const auto& t : filter_tokens()) known |= (d.filter == t);
    if (!known) throw validation_error("unknown filter token '" + d.filter + "'");
  }
  d.family = detail::parse_enum_token<Family>(
      parts[3], [](Family f) { return to_token(f); },
      {Family::firstorder, Family::shape, Family::glcm, Family::glrlm, Family::glszm, Family::gldm,
       Family::ngtdm, Family::clinical},
      "family");
  d.name = std::string(parts[4]);
  if (d.name.empty()) throw validation_error("empty feature name in descriptor");
  return d;
}

/// Deterministic enumeration of the full descriptor space:
/// 13 shape x 3 regions, 2 brain shape, then (17 first-order + 67 texture)
/// x 4 channels x 11 filters x 3 regions; optionally Age last.
/// Counts: 11,129 without age, 11,130 with.
inline std::vector<FeatureDescriptor> enumerate_descriptors(bool include_age) {
  std::vector<FeatureDescriptor> out;
  out.reserve(11130);
  const std::array<Region, 3> regions = {Region::WT, Region::TC, Region::ENC};
  const std::array<Channel, 4> channels = {Channel::T1, Channel::T1Gd, Channel::T2, Channel::FLAIR};

  for (Region r : regions)
    for (const auto& n : shape_names())
      out.push_back({r, Channel::NONE, "NONE", Family::shape, n});
  for (const auto& n : brain_shape_names())
    out.push_back({Region::BRAIN, Channel::NONE, "NONE", Family::shape, n});

  for (Region r : regions)
    for (Channel c : channels)
      for (const auto& f : filter_tokens()) {
        for (const auto& n : firstorder_names()) out.push_back({r, c, f, Family::firstorder, n});
        for (const auto& n : glcm_names()) out.push_back({r, c, f, Family::glcm, n});
        for (const auto& n : glrlm_names()) out.push_back({r, c, f, Family::glrlm, n});
        for (const auto& n : glszm_names()) out.push_back({r, c, f, Family::glszm, n});
        for (const auto& n : gldm_names()) out.push_back({r, c, f, Family::gldm, n});
        for (const auto& n : ngtdm_names()) out.push_back({r, c, f, Family::ngtdm, n});
      }

  if (include_age)
    out.push_back({Region::NONE, Channel::NONE, "NONE", Family::clinical, "Age"});
  return out;
}

inline const FeatureDescriptor& age_descriptor() {
  static const FeatureDescriptor d{Region::NONE, Channel::NONE, "NONE", Family::clinical, "Age"};
  return d;
}

}  // namespace radstack
