#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "phd/binary_io.hpp"
#include "phd/video_io.hpp"

using namespace phd;
using testing::code;
using testing::error_code_of;

namespace {

std::vector<std::uint8_t> dtvol_bytes(std::uint32_t t, std::uint32_t h, std::uint32_t w,
                                      std::size_t payload) {
  ByteWriter out;
  out.put_tag("DTV1");
  out.put_u32(t);
  out.put_u32(h);
  out.put_u32(w);
  std::vector<std::uint8_t> body(payload);
  for (std::size_t i = 0; i < payload; ++i) body[i] = static_cast<std::uint8_t>(i);
  out.put_bytes(body);
  return out.take();
}

}  // namespace

TEST_CASE("dtvol voxel order is frame, row, column") {
  const VideoVolume v = decode_dtvol(dtvol_bytes(2, 2, 2, 8));
  CHECK(v.frames() == 2);
  CHECK(v.height() == 2);
  CHECK(v.width() == 2);
  CHECK(v.at(1, 1, 1) == 7);
  CHECK(v.at(0, 0, 1) == 1);
  CHECK(v.at(0, 1, 0) == 2);
  CHECK(v.at(1, 0, 0) == 4);
}

TEST_CASE("dtvol with short payload reports truncation") {
  const auto bytes = dtvol_bytes(2, 2, 2, 7);
  bool seen = false;
  try {
    decode_dtvol(bytes);
  } catch (const Error& e) {
    seen = true;
    CHECK(e.code() == ErrorCode::TruncatedPayload);
    CHECK(std::string(e.what()).find("truncated payload") != std::string::npos);
  }
  CHECK(seen);
}

TEST_CASE("load_volume error kinds are distinct") {
  testing::TempDir dir;
  CHECK(error_code_of([&] { load_volume(dir.file("nope.dtvol")); }) == code(ErrorCode::MissingFile));

  const std::string junk = dir.file("junk.dtvol");
  {
    std::ofstream f(junk, std::ios::binary);
    f << "XXXXnot a volume at all";
  }
  CHECK(error_code_of([&] { load_volume(junk); }) == code(ErrorCode::MalformedHeader));

  std::filesystem::create_directories(dir.path() / "empty");
  CHECK(error_code_of([&] { load_volume(dir.file("empty")); }) == code(ErrorCode::EmptyDirectory));

  std::filesystem::create_directories(dir.path() / "mixed");
  save_pgm(VideoVolume(1, 4, 4), 0, dir.file("mixed/a.pgm"));
  save_pgm(VideoVolume(1, 5, 4), 0, dir.file("mixed/b.pgm"));
  CHECK(error_code_of([&] { load_volume(dir.file("mixed")); }) == code(ErrorCode::InconsistentFrames));

  const std::string short_file = dir.file("short.dtvol");
  const auto bytes = dtvol_bytes(3, 3, 3, 20);
  write_file(short_file, bytes);
  CHECK(error_code_of([&] { load_volume(short_file); }) == code(ErrorCode::TruncatedPayload));
}

TEST_CASE("directory of 50 P5 frames loads as a 50x50x50 volume") {
  testing::TempDir dir;
  const VideoVolume src = testing::random_volume(50, 50, 50, 11);
  for (std::size_t t = 0; t < 50; ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.pgm", t);
    save_pgm(src, t, dir.file(name));
  }
  const VideoVolume v = load_volume(dir.path().string());
  CHECK(v.frames() == 50);
  CHECK(v.height() == 50);
  CHECK(v.width() == 50);
  CHECK(v == src);
}

TEST_CASE("frames are ordered by file name") {
  testing::TempDir dir;
  const VideoVolume src = testing::random_volume(3, 4, 5, 2);
  save_pgm(src, 0, dir.file("b.pgm"));
  save_pgm(src, 1, dir.file("c.pgm"));
  save_pgm(src, 2, dir.file("a.pgm"));
  const VideoVolume v = load_volume(dir.path().string());
  CHECK(v.subvolume(0, 0, 0, 1, 4, 5) == src.subvolume(2, 0, 0, 1, 4, 5));
  CHECK(v.subvolume(1, 0, 0, 1, 4, 5) == src.subvolume(0, 0, 0, 1, 4, 5));
}

TEST_CASE("save then load is byte identical for assorted sizes") {
  testing::TempDir dir;
  const std::size_t sizes[][3] = {{1, 1, 1}, {2, 3, 5}, {7, 1, 9}, {16, 16, 16}, {30, 30, 30}};
  int i = 0;
  for (const auto& s : sizes) {
    const VideoVolume v = testing::random_volume(s[0], s[1], s[2], 100 + i);
    const std::string path = dir.file("v" + std::to_string(i++) + ".dtvol");
    save_volume(v, path);
    CHECK(load_volume(path) == v);
    CHECK(read_file(path) == encode_dtvol(v));
  }
}

TEST_CASE("manifest parsing") {
  const auto m = parse_manifest("# header\n\nb.dtvol,5\n/abs/c.dtvol,2,train\nd.dtvol,5,test\n", "/data");
  REQUIRE(m.entries.size() == 3);
  CHECK(m.entries[0].path == "/data/b.dtvol");
  CHECK(m.entries[0].label == 1);
  CHECK_FALSE(m.entries[0].split.has_value());
  CHECK(m.entries[1].path == "/abs/c.dtvol");
  CHECK(m.entries[1].label == 0);
  CHECK(m.entries[1].split == std::optional<std::string>("train"));
  CHECK(m.entries[2].label == 1);
  CHECK(m.class_count() == 2);
  CHECK(error_code_of([] { parse_manifest("only_a_path\n"); }) == code(ErrorCode::MalformedHeader));
}

TEST_CASE("crop keeps the requested size") {
  const VideoVolume v = testing::random_volume(75, 110, 160, 5);
  const VideoVolume c = crop_motion_window(v, 75, 48, 48);
  CHECK(c.frames() == 75);
  CHECK(c.height() == 48);
  CHECK(c.width() == 48);
  CHECK(error_code_of([&] { crop_motion_window(v, 76, 48, 48); }) == code(ErrorCode::InvalidArgument));
}

TEST_CASE("static video crops at the origin") {
  VideoVolume v(10, 12, 12);
  const VideoVolume frame = testing::random_volume(1, 12, 12, 9);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t y = 0; y < 12; ++y)
      for (std::size_t x = 0; x < 12; ++x) v.at(t, y, x) = frame.at(0, y, x);
  const CropCorner c = find_motion_window(v, 5, 6, 6);
  CHECK(c.t == 0);
  CHECK(c.y == 0);
  CHECK(c.x == 0);
}

TEST_CASE("motion in one quadrant is found and matches exhaustive search") {
  Rng rng(3);
  VideoVolume v(16, 16, 16);
  for (std::size_t t = 0; t < 16; ++t)
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x)
        v.at(t, y, x) = (y < 8 && x >= 8) ? static_cast<std::uint8_t>(rng.uniform_index(256))
                                          : static_cast<std::uint8_t>((y * 16 + x) % 251);
  const CropCorner c = find_motion_window(v, 16, 6, 6);
  CHECK(c.y + 6 <= 8);
  CHECK(c.x >= 8);
  const CropCorner o = oracle::motion_window(v, 16, 6, 6);
  CHECK(c.t == o.t);
  CHECK(c.y == o.y);
  CHECK(c.x == o.x);
}

TEST_CASE("crop matches exhaustive search on random volumes") {
  for (std::uint64_t s = 0; s < 12; ++s) {
    Rng rng(s);
    const std::size_t t = 4 + rng.uniform_index(13), h = 4 + rng.uniform_index(13),
                      w = 4 + rng.uniform_index(13);
    const VideoVolume v = testing::random_volume(t, h, w, 50 + s);
    const std::size_t ot = 1 + rng.uniform_index(t), oh = 1 + rng.uniform_index(h),
                      ow = 1 + rng.uniform_index(w);
    const CropCorner c = find_motion_window(v, ot, oh, ow);
    const CropCorner o = oracle::motion_window(v, ot, oh, ow);
    CHECK(c.t == o.t);
    CHECK(c.y == o.y);
    CHECK(c.x == o.x);
    CHECK(crop_motion_window(v, ot, oh, ow) == v.subvolume(o.t, o.y, o.x, ot, oh, ow));
  }
}

TEST_CASE("synthetic dataset shape and determinism") {
  SynthConfig cfg;
  const Dataset a = synth_dataset(cfg, 7);
  REQUIRE(a.volumes.size() == 80);
  REQUIRE(a.manifest.entries.size() == 80);
  std::map<int, int> per_class;
  for (std::size_t i = 0; i < 80; ++i) {
    per_class[a.manifest.entries[i].label]++;
    CHECK(a.volumes[i].frames() == 30);
    CHECK(a.volumes[i].height() == 30);
    CHECK(a.volumes[i].width() == 30);
  }
  CHECK(per_class.size() == 4);
  for (const auto& [label, n] : per_class) {
    CHECK(label >= 0);
    CHECK(label <= 3);
    CHECK(n == 20);
  }
  const Dataset b = synth_dataset(cfg, 7);
  CHECK(a.volumes == b.volumes);
  const Dataset c = synth_dataset(cfg, 8);
  CHECK_FALSE(a.volumes == c.volumes);

  SynthConfig none = cfg;
  none.classes = 0;
  CHECK(error_code_of([&] { synth_dataset(none, 1); }) == code(ErrorCode::InvalidArgument));
  none = cfg;
  none.videos_per_class = 0;
  CHECK(error_code_of([&] { synth_dataset(none, 1); }) == code(ErrorCode::InvalidArgument));
}

TEST_CASE("noise-free videos of one class differ only through phases") {
  SynthConfig cfg;
  cfg.classes = 2;
  cfg.videos_per_class = 2;
  cfg.noise = 0;
  const Dataset ds = synth_dataset(cfg, 7);
  const SynthClass cls = synth_class(0, 2);
  CHECK_FALSE(ds.volumes[0] == ds.volumes[1]);
  for (std::size_t i = 0; i < 2; ++i) {
    Rng rng(derive_seed(7, 0, i));
    std::vector<double> phases(cls.components.size() + 1);
    for (double& p : phases) p = 2.0 * std::numbers::pi * rng.uniform01();
    CHECK(render_gratings(cls, cfg, phases, nullptr) == ds.volumes[i]);
  }
}

TEST_CASE("paired classes share plane frequencies but not 3-D structure") {
  for (std::size_t pair = 0; pair < 2; ++pair) {
    const SynthClass even = synth_class(2 * pair, 4), odd = synth_class(2 * pair + 1, 4);
    auto plane_sets = [](const SynthClass& c) {
      std::array<std::multiset<std::pair<long, long>>, 3> planes;
      std::set<std::array<long, 3>> volume;
      for (const auto& g : c.components) {
        const long kx = std::lround(1e6 * std::abs(g.frequency * std::cos(g.orientation)));
        const long ky = std::lround(1e6 * std::abs(g.frequency * std::sin(g.orientation)));
        const long kt = std::lround(1e6 * std::abs(g.frequency * g.velocity));
        planes[0].insert({kx, ky});
        planes[1].insert({kx, kt});
        planes[2].insert({ky, kt});
        volume.insert({kx, ky, kt});
      }
      return std::make_pair(planes, volume);
    };
    const auto [pe, ve] = plane_sets(even);
    const auto [po, vo] = plane_sets(odd);
    CHECK(even.components.size() == 16);
    CHECK(odd.components.size() == 16);
    for (int p = 0; p < 3; ++p) CHECK(pe[p] == po[p]);
    std::vector<std::array<long, 3>> common;
    std::set_intersection(ve.begin(), ve.end(), vo.begin(), vo.end(), std::back_inserter(common));
    CHECK(common.empty());
  }
}

TEST_CASE("write_dataset produces a loadable manifest") {
  testing::TempDir dir;
  SynthConfig cfg;
  cfg.classes = 2;
  cfg.videos_per_class = 3;
  cfg.frames = cfg.height = cfg.width = 8;
  const Dataset ds = synth_dataset(cfg, 1);
  write_dataset(ds, dir.path().string());
  const Dataset back = load_dataset(load_manifest(dir.file("manifest.csv")));
  CHECK(back.volumes == ds.volumes);
  for (std::size_t i = 0; i < ds.volumes.size(); ++i)
    CHECK(back.manifest.entries[i].label == ds.manifest.entries[i].label);
}
