#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phd/video_io.hpp"

namespace phd {

/// Batch of pixel difference vectors, one per row.
struct PdvMatrix {
  int scale = 3;             // P
  Eigen::MatrixXd values;    // N × (P³−1)

  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  std::size_t count() const { return static_cast<std::size_t>(values.rows()); }
};

struct Stride {
  std::size_t t = 1, y = 1, x = 1;
};

inline constexpr std::size_t kNoCap = 0;

constexpr std::size_t pdv_dim(int scale) {
  return static_cast<std::size_t>(scale) * scale * scale - 1;
}

// Neighbor offsets (dt, dy, dx) in raster order with the center skipped.
struct Offset {
  int t, y, x;
};
std::vector<Offset> neighbor_offsets(int scale);

// Number of interior centers on the stride grid.
std::size_t pdv_grid_count(const VideoVolume& v, int scale, Stride stride);

/// PDVs for every interior center on the stride grid, in raster order of
/// centers. When the grid exceeds `sample_cap` (non-zero), a seeded uniform
/// subsample of exactly `sample_cap` centers is kept, still in raster order.
PdvMatrix extract_pdvs(const VideoVolume& v, int scale, Stride stride,
                       std::size_t sample_cap, std::uint64_t seed);

/// Same as concatenating extract_pdvs over `volumes` (in order) and then
/// subsampling uniformly, without materializing the full concatenation.
PdvMatrix extract_pdv_corpus(std::span<const VideoVolume* const> volumes, int scale,
                             Stride stride, std::size_t sample_cap, std::uint64_t seed);

// Debug dump: "PDV1", u32 dim, u64 count, row-major f64.
std::vector<std::uint8_t> encode_pdv_dump(const PdvMatrix& m);
PdvMatrix decode_pdv_dump(std::span<const std::uint8_t> bytes);

}  // namespace phd
