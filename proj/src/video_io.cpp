#include "phd/video_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "phd/binary_io.hpp"
#include "phd/error.hpp"
#include "phd/rng.hpp"

namespace fs = std::filesystem;

namespace phd {

VideoVolume::VideoVolume(std::size_t frames, std::size_t height, std::size_t width,
                         std::vector<std::uint8_t> data)
    : t_(frames), h_(height), w_(width), data_(std::move(data)) {
  if (t_ == 0 || h_ == 0 || w_ == 0)
    throw Error(ErrorCode::InvalidArgument, "video volume dimensions must be positive");
  if (data_.size() != t_ * h_ * w_)
    throw Error(ErrorCode::DimensionMismatch, "video volume data length != T*H*W");
}

VideoVolume::VideoVolume(std::size_t frames, std::size_t height, std::size_t width)
    : VideoVolume(frames, height, width,
                  std::vector<std::uint8_t>(frames * height * width, 0)) {}

VideoVolume VideoVolume::subvolume(std::size_t t0, std::size_t y0, std::size_t x0,
                                   std::size_t frames, std::size_t height,
                                   std::size_t width) const {
  if (t0 + frames > t_ || y0 + height > h_ || x0 + width > w_)
    throw Error(ErrorCode::InvalidArgument, "subvolume exceeds volume bounds");
  std::vector<std::uint8_t> out;
  out.reserve(frames * height * width);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t y = 0; y < height; ++y) {
      const auto* row = &data_[((t0 + t) * h_ + y0 + y) * w_ + x0];
      out.insert(out.end(), row, row + width);
    }
  return VideoVolume(frames, height, width, std::move(out));
}

// ---------------------------------------------------------------------------
// .dtvol

namespace {
constexpr char kDtvolMagic[4] = {'D', 'T', 'V', '1'};
}

std::vector<std::uint8_t> encode_dtvol(const VideoVolume& v) {
  ByteWriter w;
  w.put_tag(std::string_view(kDtvolMagic, 4));
  w.put_u32(static_cast<std::uint32_t>(v.frames()));
  w.put_u32(static_cast<std::uint32_t>(v.height()));
  w.put_u32(static_cast<std::uint32_t>(v.width()));
  w.put_bytes(v.data());
  return w.take();
}

VideoVolume decode_dtvol(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) throw Error(ErrorCode::MalformedHeader, "malformed header: .dtvol shorter than header");
  ByteReader r(bytes);
  if (r.get_tag() != std::string_view(kDtvolMagic, 4))
    throw Error(ErrorCode::MalformedHeader, "malformed header: bad .dtvol magic");
  const std::uint64_t t = r.get_u32(), h = r.get_u32(), w = r.get_u32();
  if (t == 0 || h == 0 || w == 0)
    throw Error(ErrorCode::MalformedHeader, "malformed header: zero dimension");
  const std::uint64_t n = t * h * w;
  if (r.remaining() < n) throw Error(ErrorCode::TruncatedPayload, "truncated payload");
  if (r.remaining() > n)
    throw Error(ErrorCode::MalformedHeader, "malformed header: trailing bytes after payload");
  auto payload = r.get_bytes(n);
  return VideoVolume(t, h, w, std::vector<std::uint8_t>(payload.begin(), payload.end()));
}

// ---------------------------------------------------------------------------
// P5 PGM frames

namespace {

struct PgmFrame {
  std::size_t height = 0, width = 0;
  std::vector<std::uint8_t> pixels;
};

PgmFrame decode_pgm(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space();
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) ++pos;
    if (start == pos) throw Error(ErrorCode::MalformedHeader, "malformed header: " + path);
    std::size_t value = 0;
    std::from_chars(reinterpret_cast<const char*>(&bytes[start]),
                    reinterpret_cast<const char*>(&bytes[pos]), value);
    return value;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw Error(ErrorCode::MalformedHeader, "malformed header: not a P5 image: " + path);
  pos = 2;
  PgmFrame f;
  f.width = read_uint();
  f.height = read_uint();
  const std::size_t maxval = read_uint();
  if (f.width == 0 || f.height == 0 || maxval == 0 || maxval > 255)
    throw Error(ErrorCode::MalformedHeader, "malformed header: unsupported P5 geometry: " + path);
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw Error(ErrorCode::MalformedHeader, "malformed header: " + path);
  ++pos;
  const std::size_t n = f.width * f.height;
  if (bytes.size() - pos < n) throw Error(ErrorCode::TruncatedPayload, "truncated payload: " + path);
  f.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return f;
}

VideoVolume load_frame_directory(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  if (files.empty()) throw Error(ErrorCode::EmptyDirectory, "empty directory: " + dir);
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  std::vector<std::uint8_t> data;
  std::size_t h = 0, w = 0;
  for (const auto& f : files) {
    auto frame = decode_pgm(read_file(f.string()), f.string());
    if (data.empty()) {
      h = frame.height;
      w = frame.width;
    } else if (frame.height != h || frame.width != w) {
      throw Error(ErrorCode::InconsistentFrames, "inconsistent frame sizes in " + dir);
    }
    data.insert(data.end(), frame.pixels.begin(), frame.pixels.end());
  }
  return VideoVolume(files.size(), h, w, std::move(data));
}

}  // namespace

void save_pgm(const VideoVolume& v, std::size_t frame, const std::string& path) {
  std::string header = "P5\n" + std::to_string(v.width()) + " " +
                       std::to_string(v.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  const auto* begin = v.data().data() + frame * v.height() * v.width();
  bytes.insert(bytes.end(), begin, begin + v.height() * v.width());
  write_file(path, bytes);
}

VideoVolume load_volume(const std::string& path) {
  if (fs::is_directory(path)) return load_frame_directory(path);
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, "missing file: " + path);
  return decode_dtvol(read_file(path));
}

void save_volume(const VideoVolume& v, const std::string& path) {
  write_file(path, encode_dtvol(v));
}

// ---------------------------------------------------------------------------
// Manifests

std::size_t DatasetManifest::class_count() const {
  std::set<int> labels;
  for (const auto& e : entries) labels.insert(e.label);
  return labels.size();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

DatasetManifest parse_manifest(const std::string& text, const std::string& base_dir) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(trim(field));
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty())
      throw Error(ErrorCode::MalformedHeader,
                  "manifest line " + std::to_string(lineno) + ": expected path,label[,split]");
    ManifestEntry e;
    fs::path p(fields[0]);
    e.path = (p.is_relative() && !base_dir.empty()) ? (fs::path(base_dir) / p).string() : p.string();
    int label = -1;
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), label);
    if (ec != std::errc() || ptr != fields[1].data() + fields[1].size() || label < 0)
      throw Error(ErrorCode::MalformedHeader,
                  "manifest line " + std::to_string(lineno) + ": label must be a non-negative integer");
    e.label = label;
    if (fields.size() == 3 && !fields[2].empty()) e.split = fields[2];
    m.entries.push_back(std::move(e));
  }
  std::map<int, int> remap;
  for (const auto& e : m.entries) remap.emplace(e.label, 0);
  int next = 0;
  for (auto& [orig, mapped] : remap) mapped = next++;
  for (auto& e : m.entries) e.label = remap.at(e.label);
  return m;
}

DatasetManifest load_manifest(const std::string& path) {
  auto bytes = read_file(path);
  return parse_manifest(std::string(bytes.begin(), bytes.end()),
                        fs::path(path).parent_path().string());
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ostringstream out;
  out << "# path,label[,split]\n";
  for (const auto& e : m.entries) {
    out << e.path << ',' << e.label;
    if (e.split) out << ',' << *e.split;
    out << '\n';
  }
  const std::string s = out.str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Dataset load_dataset(const DatasetManifest& manifest) {
  Dataset ds;
  ds.manifest = manifest;
  ds.volumes.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) ds.volumes.push_back(load_volume(e.path));
  return ds;
}

// ---------------------------------------------------------------------------
// Motion crop

CropCorner find_motion_window(const VideoVolume& v, std::size_t out_t,
                              std::size_t out_h, std::size_t out_w) {
  if (out_t == 0 || out_h == 0 || out_w == 0)
    throw Error(ErrorCode::InvalidArgument, "crop size must be positive");
  if (out_t > v.frames() || out_h > v.height() || out_w > v.width())
    throw Error(ErrorCode::InvalidArgument, "requested crop size exceeds volume");
  const std::size_t T = v.frames(), H = v.height(), W = v.width();
  const std::size_t plane = H * W;
  const auto n = static_cast<std::int64_t>(out_t);

  // Temporal prefix sums of I and I^2 per pixel.
  std::vector<std::int64_t> s1((T + 1) * plane, 0), s2((T + 1) * plane, 0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t p = 0; p < plane; ++p) {
      const std::int64_t i = v.data()[t * plane + p];
      s1[(t + 1) * plane + p] = s1[t * plane + p] + i;
      s2[(t + 1) * plane + p] = s2[t * plane + p] + i * i;
    }

  // Per-pixel score n*sum(I^2) - sum(I)^2 = n^2 * variance; integer-exact.
  std::vector<std::int64_t> sat((H + 1) * (W + 1));
  CropCorner best;
  std::int64_t best_score = -1;
  for (std::size_t t0 = 0; t0 + out_t <= T; ++t0) {
    std::fill(sat.begin(), sat.end(), 0);
    for (std::size_t y = 0; y < H; ++y) {
      std::int64_t row = 0;
      for (std::size_t x = 0; x < W; ++x) {
        const std::size_t p = y * W + x;
        const std::int64_t a = s1[(t0 + out_t) * plane + p] - s1[t0 * plane + p];
        const std::int64_t b = s2[(t0 + out_t) * plane + p] - s2[t0 * plane + p];
        row += n * b - a * a;
        sat[(y + 1) * (W + 1) + x + 1] = sat[y * (W + 1) + x + 1] + row;
      }
    }
    for (std::size_t y0 = 0; y0 + out_h <= H; ++y0)
      for (std::size_t x0 = 0; x0 + out_w <= W; ++x0) {
        const std::int64_t score = sat[(y0 + out_h) * (W + 1) + x0 + out_w] -
                                   sat[y0 * (W + 1) + x0 + out_w] -
                                   sat[(y0 + out_h) * (W + 1) + x0] + sat[y0 * (W + 1) + x0];
        if (score > best_score) {
          best_score = score;
          best = {t0, y0, x0};
        }
      }
  }
  return best;
}

VideoVolume crop_motion_window(const VideoVolume& v, std::size_t out_t,
                               std::size_t out_h, std::size_t out_w) {
  const auto c = find_motion_window(v, out_t, out_h, out_w);
  return v.subvolume(c.t, c.y, c.x, out_t, out_h, out_w);
}

// ---------------------------------------------------------------------------
// Synthetic gratings

SynthClass synth_class(std::size_t label, std::size_t classes) {
  const std::size_t pairs = (classes + 1) / 2;
  const std::size_t pair = label / 2;
  const unsigned parity = label % 2;
  const double k1 = 0.05 + 0.15 * static_cast<double>(pair) / static_cast<double>(pairs);
  const double k2 = k1 + 0.15;
  SynthClass cls;
  for (unsigned m = 0; m < 8; ++m) {
    if (static_cast<unsigned>(std::popcount(m)) % 2 != parity) continue;
    const double kx = (m & 1) ? k2 : k1;
    const double ky_mag = (m & 2) ? k2 : k1;
    const double kt_mag = (m & 4) ? k2 : k1;
    for (double sy : {1.0, -1.0})
      for (double st : {1.0, -1.0}) {
        const double ky = sy * ky_mag, kt = st * kt_mag;
        const double f = std::hypot(kx, ky);
        cls.components.push_back({f, std::atan2(ky, kx), kt / f});
      }
  }
  cls.flicker_rate = 0.05 * static_cast<double>(1 + label % 2);
  return cls;
}

VideoVolume render_gratings(const SynthClass& cls, const SynthConfig& config,
                            std::span<const double> phases, Rng* noise_rng) {
  if (phases.size() != cls.components.size() + 1)
    throw Error(ErrorCode::InvalidArgument, "need one phase per grating plus the flicker phase");
  VideoVolume v(config.frames, config.height, config.width);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t t = 0; t < config.frames; ++t) {
    double gain = 1.0;
    if (config.flicker && cls.flicker_rate > 0)
      gain = 0.75 + 0.25 * std::sin(two_pi * cls.flicker_rate * static_cast<double>(t) + phases.back());
    for (std::size_t y = 0; y < config.height; ++y)
      for (std::size_t x = 0; x < config.width; ++x) {
        double wave = 0;
        for (std::size_t j = 0; j < cls.components.size(); ++j) {
          const auto& g = cls.components[j];
          const double along = static_cast<double>(x) * std::cos(g.orientation) +
                               static_cast<double>(y) * std::sin(g.orientation);
          wave += std::sin(two_pi * g.frequency * (along - g.velocity * static_cast<double>(t)) + phases[j]);
        }
        double value = 128.0 + gain * config.amplitude * wave;
        if (noise_rng != nullptr && config.noise > 0) value += config.noise * noise_rng->normal();
        v.at(t, y, x) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
  }
  return v;
}

Dataset synth_dataset(const SynthConfig& config, std::uint64_t seed) {
  if (config.classes == 0) throw Error(ErrorCode::InvalidArgument, "synth_dataset: zero classes requested");
  if (config.videos_per_class == 0)
    throw Error(ErrorCode::InvalidArgument, "synth_dataset: zero videos per class requested");
  Dataset ds;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t c = 0; c < config.classes; ++c) {
    const SynthClass cls = synth_class(c, config.classes);
    for (std::size_t i = 0; i < config.videos_per_class; ++i) {
      Rng rng(derive_seed(seed, c, i));
      std::vector<double> phases(cls.components.size() + 1);
      for (double& p : phases) p = two_pi * rng.uniform01();
      ds.volumes.push_back(render_gratings(cls, config, phases, &rng));
      char name[64];
      std::snprintf(name, sizeof name, "synth/c%02zu_v%03zu.dtvol", c, i);
      ds.manifest.entries.push_back({name, static_cast<int>(c), std::nullopt});
    }
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  DatasetManifest relative;
  for (std::size_t i = 0; i < ds.volumes.size(); ++i) {
    auto entry = ds.manifest.entries[i];
    const fs::path rel = fs::path(entry.path).filename();
    save_volume(ds.volumes[i], (fs::path(dir) / rel).string());
    entry.path = rel.string();
    relative.entries.push_back(entry);
  }
  save_manifest(relative, (fs::path(dir) / "manifest.csv").string());
}

}  // namespace phd
