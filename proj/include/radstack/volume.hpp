#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radstack/common.hpp"

namespace radstack {

using json = nlohmann::ordered_json;

struct Dims {
  int nx = 0, ny = 0, nz = 0;
  bool operator==(const Dims&) const = default;
  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
};

using Spacing = std::array<double, 3>;

inline std::size_t voxel_index(const Dims& d, int x, int y, int z) {
  // x-fastest order
  return static_cast<std::size_t>(x) +
         static_cast<std::size_t>(d.nx) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(z));
}

/// Mirror index into [0, n): symmetric about the edge samples, edge not repeated.
inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

/// A 3D scalar field with physical voxel spacing, values in x-fastest order.
struct VolumeGrid {
  Dims dims;
  Spacing spacing_mm{1.0, 1.0, 1.0};
  std::vector<double> values;

  double at(int x, int y, int z) const { return values[voxel_index(dims, x, y, z)]; }
  double& at(int x, int y, int z) { return values[voxel_index(dims, x, y, z)]; }

  void validate() const {
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
      throw validation_error("volume dims must all be >= 1");
    if (!(spacing_mm[0] > 0 && spacing_mm[1] > 0 && spacing_mm[2] > 0))
      throw validation_error("volume spacing must be strictly positive");
    if (values.size() != dims.count())
      throw validation_error("volume value count does not match dims");
  }
};

inline VolumeGrid make_volume(Dims d, Spacing s, double fill = 0.0) {
  VolumeGrid v;
  v.dims = d;
  v.spacing_mm = s;
  v.values.assign(d.count(), fill);
  return v;
}

/// Integer-labelled mask with BraTS label codes {0 bg, 1 NEC, 2 PTE, 4 ENC}.
struct LabelMask {
  Dims dims;
  Spacing spacing_mm{1.0, 1.0, 1.0};
  std::vector<std::uint8_t> labels;

  std::uint8_t at(int x, int y, int z) const { return labels[voxel_index(dims, x, y, z)]; }
  std::uint8_t& at(int x, int y, int z) { return labels[voxel_index(dims, x, y, z)]; }

  void validate() const {
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
      throw validation_error("mask dims must all be >= 1");
    if (labels.size() != dims.count())
      throw validation_error("mask label count does not match dims");
    for (std::uint8_t l : labels)
      if (l != 0 && l != 1 && l != 2 && l != 4)
        throw validation_error("unknown label value " + std::to_string(int(l)) + " (expected 0/1/2/4)");
  }
};

enum class RegionId { WT, TC, ENC };

inline const char* region_token(RegionId r) {
  switch (r) {
    case RegionId::WT: return "WT";
    case RegionId::TC: return "TC";
    case RegionId::ENC: return "ENC";
  }
  return "?";
}

/// One derived overlapping region of a LabelMask.
struct RegionMask {
  Dims dims;
  Spacing spacing_mm{1.0, 1.0, 1.0};
  RegionId region_id = RegionId::WT;
  std::vector<std::uint8_t> voxels;  // 0/1

  bool at(int x, int y, int z) const { return voxels[voxel_index(dims, x, y, z)] != 0; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto v : voxels) c += (v != 0);
    return c;
  }
};

struct DerivedRegions {
  RegionMask wt, tc, enc;       // overlapping hierarchy, ENC <= TC <= WT
  RegionMask pte, nec, enc_nv;  // non-overlapping partition (enc_nv == enc)
};

/// WT = {1,2,4}, TC = {1,4}, ENC = {4}; PTE = {2}, NEC = {1}.
inline DerivedRegions derive_regions(const LabelMask& mask) {
  mask.validate();
  DerivedRegions out;
  auto init = [&](RegionMask& r, RegionId id) {
    r.dims = mask.dims;
    r.spacing_mm = mask.spacing_mm;
    r.region_id = id;
    r.voxels.assign(mask.labels.size(), 0);
  };
  init(out.wt, RegionId::WT);
  init(out.tc, RegionId::TC);
  init(out.enc, RegionId::ENC);
  init(out.pte, RegionId::WT);
  init(out.nec, RegionId::TC);
  init(out.enc_nv, RegionId::ENC);
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    switch (mask.labels[i]) {
      case 1:
        out.wt.voxels[i] = out.tc.voxels[i] = out.nec.voxels[i] = 1;
        break;
      case 2:
        out.wt.voxels[i] = out.pte.voxels[i] = 1;
        break;
      case 4:
        out.wt.voxels[i] = out.tc.voxels[i] = out.enc.voxels[i] = out.enc_nv.voxels[i] = 1;
        break;
      default:
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// "rawvol v1" on-disk format: a JSON sidecar header plus a raw little-endian
// payload file living next to it at "<header path>.bin". Renaming a volume
// means renaming the pair, as with any sidecar format.
// ---------------------------------------------------------------------------

namespace detail {

inline json read_rawvol_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open volume header: " + path.string());
  json h;
  try {
    in >> h;
  } catch (const std::exception& e) {
    throw validation_error("bad volume header " + path.string() + ": " + e.what());
  }
  if (h.value("format", "") != "rawvol" || h.value("version", 0) != 1)
    throw validation_error("not a rawvol v1 header: " + path.string());
  return h;
}

inline std::vector<unsigned char> read_payload(const std::filesystem::path& header_path, const json&,
                                               std::size_t expect_bytes) {
  const auto payload_path = std::filesystem::path(header_path.string() + ".bin");
  std::ifstream in(payload_path, std::ios::binary);
  if (!in) throw validation_error("cannot open volume payload: " + payload_path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != expect_bytes)
    throw validation_error("payload length mismatch for " + header_path.string() + ": expected " +
                           std::to_string(expect_bytes) + " bytes, got " + std::to_string(bytes.size()));
  return bytes;
}

inline void parse_geometry(const json& h, const std::filesystem::path& path, Dims& dims, Spacing& sp) {
  const auto d = h.at("dims");
  const auto s = h.at("spacing_mm");
  if (!d.is_array() || d.size() != 3 || !s.is_array() || s.size() != 3)
    throw validation_error("bad dims/spacing in " + path.string());
  dims = Dims{d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
  sp = Spacing{s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
  if (h.value("order", "x-fastest") != "x-fastest")
    throw validation_error("unsupported voxel order in " + path.string());
}

inline void write_rawvol(const std::filesystem::path& path, const Dims& dims, const Spacing& sp,
                         const std::string& dtype, const void* data, std::size_t bytes) {
  json h;
  h["format"] = "rawvol";
  h["version"] = 1;
  h["dims"] = {dims.nx, dims.ny, dims.nz};
  h["spacing_mm"] = {sp[0], sp[1], sp[2]};
  h["dtype"] = dtype;
  h["order"] = "x-fastest";
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write volume header: " + path.string());
  out << h.dump(2) << "\n";
  const auto payload_path = std::filesystem::path(path.string() + ".bin");
  std::ofstream bin(payload_path, std::ios::binary);
  if (!bin) throw validation_error("cannot write volume payload: " + payload_path.string());
  bin.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

}  // namespace detail

inline VolumeGrid read_volume(const std::filesystem::path& path) {
  const json h = detail::read_rawvol_header(path);
  VolumeGrid vol;
  detail::parse_geometry(h, path, vol.dims, vol.spacing_mm);
  const std::string dtype = h.value("dtype", "");
  const std::size_t n = vol.dims.count();
  vol.values.resize(n);
  if (dtype == "f32le") {
    const auto bytes = detail::read_payload(path, h, n * 4);
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, bytes.data() + i * 4, 4);
      vol.values[i] = static_cast<double>(f);
    }
  } else if (dtype == "u8") {
    const auto bytes = detail::read_payload(path, h, n);
    for (std::size_t i = 0; i < n; ++i) vol.values[i] = static_cast<double>(bytes[i]);
  } else {
    throw validation_error("unknown dtype '" + dtype + "' in " + path.string());
  }
  vol.validate();
  return vol;
}

inline void write_volume(const VolumeGrid& vol, const std::filesystem::path& path,
                         const std::string& dtype = "f32le") {
  vol.validate();
  const std::size_t n = vol.values.size();
  if (dtype == "f32le") {
    std::vector<float> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = static_cast<float>(vol.values[i]);
    detail::write_rawvol(path, vol.dims, vol.spacing_mm, dtype, f.data(), n * 4);
  } else if (dtype == "u8") {
    std::vector<std::uint8_t> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(vol.values[i]);
    detail::write_rawvol(path, vol.dims, vol.spacing_mm, dtype, b.data(), n);
  } else {
    throw validation_error("unknown dtype '" + dtype + "'");
  }
}

inline LabelMask read_label_mask(const std::filesystem::path& path) {
  const json h = detail::read_rawvol_header(path);
  LabelMask mask;
  detail::parse_geometry(h, path, mask.dims, mask.spacing_mm);
  if (h.value("dtype", "") != "u8")
    throw validation_error("label masks must be dtype u8: " + path.string());
  const auto bytes = detail::read_payload(path, h, mask.dims.count());
  mask.labels.assign(bytes.begin(), bytes.end());
  mask.validate();
  return mask;
}

inline void write_label_mask(const LabelMask& mask, const std::filesystem::path& path) {
  mask.validate();
  detail::write_rawvol(path, mask.dims, mask.spacing_mm, "u8", mask.labels.data(), mask.labels.size());
}

}  // namespace radstack
