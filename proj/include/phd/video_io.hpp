#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace phd {

class Rng;

/// T×H×W grayscale cube stored frame-major, then row-major.
class VideoVolume {
 public:
  VideoVolume() = default;
  VideoVolume(std::size_t frames, std::size_t height, std::size_t width,
              std::vector<std::uint8_t> data);
  // Zero-filled volume.
  VideoVolume(std::size_t frames, std::size_t height, std::size_t width);

  std::size_t frames() const { return t_; }
  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t size() const { return data_.size(); }

  std::uint8_t at(std::size_t t, std::size_t y, std::size_t x) const {
    return data_[(t * h_ + y) * w_ + x];
  }
  std::uint8_t& at(std::size_t t, std::size_t y, std::size_t x) {
    return data_[(t * h_ + y) * w_ + x];
  }

  const std::vector<std::uint8_t>& data() const { return data_; }

  // Contiguous sub-cube with corner (t0, y0, x0).
  VideoVolume subvolume(std::size_t t0, std::size_t y0, std::size_t x0,
                        std::size_t frames, std::size_t height,
                        std::size_t width) const;

  bool operator==(const VideoVolume&) const = default;

 private:
  std::size_t t_ = 0, h_ = 0, w_ = 0;
  std::vector<std::uint8_t> data_;
};

struct ManifestEntry {
  std::string path;
  int label = 0;
  std::optional<std::string> split;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t class_count() const;
};

/// Volumes paired with their manifest, index-aligned.
struct Dataset {
  DatasetManifest manifest;
  std::vector<VideoVolume> volumes;
};

// `.dtvol` file or a directory of P5 PGM frames.
VideoVolume load_volume(const std::string& path);
void save_volume(const VideoVolume& v, const std::string& path);

std::vector<std::uint8_t> encode_dtvol(const VideoVolume& v);
VideoVolume decode_dtvol(const std::vector<std::uint8_t>& bytes);

// Single P5 frame; exposed for writing frame directories in tests/tools.
void save_pgm(const VideoVolume& v, std::size_t frame, const std::string& path);

// Parses `path,label[,split]` records. Relative paths are resolved against
// the manifest's directory; labels are remapped to 0..C-1 in ascending order.
DatasetManifest load_manifest(const std::string& path);
DatasetManifest parse_manifest(const std::string& text, const std::string& base_dir = "");
void save_manifest(const DatasetManifest& m, const std::string& path);

Dataset load_dataset(const DatasetManifest& manifest);

/// Motion window search: the outT×outH×outW sub-cube maximizing the summed
/// per-pixel temporal variance inside it. Ties go to the smallest (t, y, x).
VideoVolume crop_motion_window(const VideoVolume& v, std::size_t out_t,
                               std::size_t out_h, std::size_t out_w);

struct CropCorner {
  std::size_t t = 0, y = 0, x = 0;
};
CropCorner find_motion_window(const VideoVolume& v, std::size_t out_t,
                              std::size_t out_h, std::size_t out_w);

struct SynthConfig {
  std::size_t classes = 4;
  std::size_t videos_per_class = 20;
  std::size_t frames = 30;
  std::size_t height = 30;
  std::size_t width = 30;
  double noise = 10.0;      // additive Gaussian sigma in intensity units
  double amplitude = 12.0;  // per grating component
  bool flicker = false;
};

/// One moving sinusoidal grating: sin(2π f (x cosθ + y sinθ − v t) + φ).
struct GratingComponent {
  double frequency;    // cycles per pixel
  double orientation;  // radians
  double velocity;     // pixels per frame along the wave normal
};

struct SynthClass {
  std::vector<GratingComponent> components;
  double flicker_rate = 0;  // cycles per frame of the gain modulation
};

/// Classes come in pairs sharing two frequency magnitudes {k1, k2}. Each
/// class superposes gratings whose (x, y, t) wave-vector components take
/// magnitudes from {k1, k2} with every sign pattern; the even member of a
/// pair uses magnitude triples with an even number of k2 entries, the odd
/// member those with an odd number. Both members then present the same
/// set of 2-D frequencies on every XY, XT and YT slice and differ only in
/// their joint 3-D structure.
SynthClass synth_class(std::size_t label, std::size_t classes);

// Renders one video; `phases` holds one phase per component, followed by
// the flicker phase. Noise is drawn from `noise_rng` when given.
VideoVolume render_gratings(const SynthClass& cls, const SynthConfig& config,
                            std::span<const double> phases, Rng* noise_rng);

// Deterministic for a fixed seed. Paths are "synth/cXX_vYYY.dtvol".
Dataset synth_dataset(const SynthConfig& config, std::uint64_t seed);

// Writes every volume under `dir` and a `manifest.csv` referencing them.
void write_dataset(const Dataset& ds, const std::string& dir);

}  // namespace phd
