#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "radstack/descriptors.hpp"
#include "radstack/manifest.hpp"
#include "radstack/matrix.hpp"
#include "radstack/volume.hpp"

using namespace radstack;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto p = fs::temp_directory_path() / "radstack_core_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("rawvol round-trip is bit-exact for f32 and u8") {
  const auto dir = temp_dir();

  VolumeGrid v = make_volume({2, 2, 2}, {1, 1, 1});
  write_volume(v, dir / "zeros.rawvol");
  auto back = read_volume(dir / "zeros.rawvol");
  REQUIRE(back.dims == v.dims);
  REQUIRE(back.values == v.values);

  // x-fastest order with anisotropic spacing
  VolumeGrid ramp = make_volume({3, 1, 1}, {1, 2, 4});
  ramp.values = {1, 2, 3};
  write_volume(ramp, dir / "ramp.rawvol");
  back = read_volume(dir / "ramp.rawvol");
  REQUIRE(back.values == std::vector<double>{1, 2, 3});
  REQUIRE(back.spacing_mm == Spacing{1, 2, 4});

  // random f32-representable payload round-trips exactly
  Rng rng(7);
  VolumeGrid noise = make_volume({5, 4, 3}, {1, 1, 1});
  for (auto& x : noise.values) x = static_cast<double>(static_cast<float>(rng.next_gauss()));
  write_volume(noise, dir / "noise.rawvol");
  REQUIRE(read_volume(dir / "noise.rawvol").values == noise.values);

  LabelMask m;
  m.dims = {2, 2, 1};
  m.labels = {0, 1, 2, 4};
  write_label_mask(m, dir / "mask.rawvol");
  REQUIRE(read_label_mask(dir / "mask.rawvol").labels == m.labels);
}

TEST_CASE("rawvol length mismatch is rejected") {
  const auto dir = temp_dir();
  VolumeGrid v = make_volume({2, 2, 2}, {1, 1, 1});
  write_volume(v, dir / "bad.rawvol");
  // truncate the payload to 7 values
  std::ofstream(dir / "bad.rawvol.bin", std::ios::binary).write("0123456789012345678901234567", 28);
  REQUIRE_THROWS_AS(read_volume(dir / "bad.rawvol"), validation_error);
}

TEST_CASE("derive_regions builds the nested hierarchy") {
  LabelMask m;
  m.dims = {4, 1, 1};
  m.labels = {0, 1, 2, 4};
  const auto r = derive_regions(m);

  // label 2 -> WT only
  REQUIRE(r.wt.voxels[2] == 1);
  REQUIRE(r.tc.voxels[2] == 0);
  REQUIRE(r.enc.voxels[2] == 0);
  // label 4 -> WT, TC, ENC
  REQUIRE(r.wt.voxels[3] == 1);
  REQUIRE(r.tc.voxels[3] == 1);
  REQUIRE(r.enc.voxels[3] == 1);
  // label 1 -> WT and TC, not ENC
  REQUIRE(r.wt.voxels[1] == 1);
  REQUIRE(r.tc.voxels[1] == 1);
  REQUIRE(r.enc.voxels[1] == 0);
  // non-overlapping partition
  REQUIRE(r.pte.voxels[2] == 1);
  REQUIRE(r.nec.voxels[1] == 1);

  // exhaustive nesting over every possible label value
  for (std::uint8_t label : {std::uint8_t(0), std::uint8_t(1), std::uint8_t(2), std::uint8_t(4)}) {
    LabelMask one;
    one.dims = {1, 1, 1};
    one.labels = {label};
    const auto rr = derive_regions(one);
    REQUIRE((rr.enc.voxels[0] == 0 || rr.tc.voxels[0] == 1));   // ENC subset TC
    REQUIRE((rr.tc.voxels[0] == 0 || rr.wt.voxels[0] == 1));    // TC subset WT
  }

  LabelMask bad;
  bad.dims = {1, 1, 1};
  bad.labels = {3};
  REQUIRE_THROWS_AS(derive_regions(bad), validation_error);
}

TEST_CASE("descriptor enumeration counts and round-trip") {
  const auto base = enumerate_descriptors(false);
  REQUIRE(base.size() == 11129);
  const auto with_age = enumerate_descriptors(true);
  REQUIRE(with_age.size() == 11130);

  // decomposition: 13 x 3 shape + 2 brain + 84 x 4 x 11 x 3
  std::size_t shape = 0, brain = 0, intensity = 0;
  for (const auto& d : base) {
    if (d.family == Family::shape && d.region == Region::BRAIN) ++brain;
    else if (d.family == Family::shape) ++shape;
    else ++intensity;
  }
  REQUIRE(shape == 13 * 3);
  REQUIRE(brain == 2);
  REQUIRE(intensity == 84 * 4 * 11 * 3);

  // one region/channel, filter=original, first-order + texture = 84
  std::size_t restricted = 0;
  for (const auto& d : base)
    if (d.region == Region::WT && d.channel == Channel::T1 && d.filter == "original" &&
        d.family != Family::shape)
      ++restricted;
  REQUIRE(restricted == 84);

  // canonical string form round-trips for all enumerated descriptors
  for (const auto& d : with_age) {
    const auto parsed = parse_descriptor(d.str());
    REQUIRE(parsed == d);
  }
  // order is deterministic
  REQUIRE(enumerate_descriptors(true) == with_age);
}

TEST_CASE("manifest loading validates ids and labels") {
  const auto dir = temp_dir();
  {
    std::ofstream out(dir / "ok.json");
    out << R"({"subjects":[
      {"id":"s1","volumes":{"T1":"s1/t1.rawvol"},"masks":{"truth":"s1/m.rawvol"},
       "label":{"task":"IDH","value":0},"age":55.5},
      {"id":"s2","volumes":{},"masks":{},"label":{"task":"IDH","value":1}}]})";
  }
  const auto m = load_manifest(dir / "ok.json");
  REQUIRE(m.subjects.size() == 2);
  REQUIRE(m.subjects[0].label->value == 0);
  REQUIRE(m.subjects[0].age == 55.5);
  REQUIRE_FALSE(m.subjects[1].age.has_value());
  // paths resolve relative to the manifest
  REQUIRE(m.subjects[0].volumes.at("T1") == dir / "s1/t1.rawvol");

  {
    std::ofstream out(dir / "dup.json");
    out << R"({"subjects":[{"id":"s1"},{"id":"s1"}]})";
  }
  REQUIRE_THROWS_WITH(load_manifest(dir / "dup.json"), Catch::Matchers::ContainsSubstring("duplicate subject id"));

  {
    std::ofstream out(dir / "badlabel.json");
    out << R"({"subjects":[{"id":"s1","label":{"task":"OS","value":3}}]})";
  }
  REQUIRE_THROWS_WITH(load_manifest(dir / "badlabel.json"), Catch::Matchers::ContainsSubstring("invalid label"));
}

TEST_CASE("feature matrix CSV round-trips values and NaN") {
  const auto dir = temp_dir();
  FeatureMatrix m;
  m.descriptors = {parse_descriptor("WT:T1:original:firstorder:Mean"),
                   parse_descriptor("NONE:NONE:NONE:clinical:Age")};
  m.subject_ids = {"a", "b"};
  m.values = {1.2345678901234567, kNaN, -3.5e-12, 42.0};
  write_feature_csv(m, dir / "t.csv");
  const auto back = read_feature_csv(dir / "t.csv");
  REQUIRE(back.subject_ids == m.subject_ids);
  REQUIRE(back.descriptors == m.descriptors);
  REQUIRE(back.values[0] == m.values[0]);
  REQUIRE(std::isnan(back.values[1]));
  REQUIRE(back.values[2] == m.values[2]);
  REQUIRE(back.values[3] == 42.0);
}

TEST_CASE("label vault guards test labels until unlocked") {
  LabelVault vault(std::map<std::string, int>{{"s1", 1}});
  REQUIRE_THROWS_AS(vault.open(), validation_error);
  vault.unlock();
  REQUIRE(vault.open().at("s1") == 1);
}
