#include "phd/pdv.hpp"

#include "phd/binary_io.hpp"
#include "phd/error.hpp"
#include "phd/rng.hpp"

namespace phd {
namespace {

void check_scale(const VideoVolume& v, int scale) {
  if (scale < 3 || scale % 2 == 0)
    throw Error(ErrorCode::InvalidArgument, "neighborhood size P must be odd and >= 3");
  const auto p = static_cast<std::size_t>(scale);
  if (v.frames() < p || v.height() < p || v.width() < p)
    throw Error(ErrorCode::InvalidArgument,
                "volume smaller than the P×P×P neighborhood in some axis");
}

struct Grid {
  std::size_t nt, ny, nx;
  std::size_t count() const { return nt * ny * nx; }
};

Grid grid_of(const VideoVolume& v, int scale, Stride s) {
  if (s.t == 0 || s.y == 0 || s.x == 0)
    throw Error(ErrorCode::InvalidArgument, "stride must be positive");
  const auto p = static_cast<std::size_t>(scale);
  return {(v.frames() - p) / s.t + 1, (v.height() - p) / s.y + 1, (v.width() - p) / s.x + 1};
}

// Writes the PDV of grid cell `cell` into `out`.
void fill_row(const VideoVolume& v, int scale, Stride s, const Grid& g,
              std::span<const Offset> offsets, std::size_t cell, double* out,
              Eigen::Index stride) {
  const auto r = static_cast<std::size_t>(scale / 2);
  const std::size_t gx = cell % g.nx;
  const std::size_t gy = (cell / g.nx) % g.ny;
  const std::size_t gt = cell / (g.nx * g.ny);
  const std::size_t ct = r + gt * s.t, cy = r + gy * s.y, cx = r + gx * s.x;
  const double center = v.at(ct, cy, cx);
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    const auto& o = offsets[j];
    out[static_cast<Eigen::Index>(j) * stride] =
        static_cast<double>(v.at(ct + o.t, cy + o.y, cx + o.x)) - center;
  }
}

}  // namespace

std::vector<Offset> neighbor_offsets(int scale) {
  const int r = scale / 2;
  std::vector<Offset> out;
  out.reserve(pdv_dim(scale));
  for (int t = -r; t <= r; ++t)
    for (int y = -r; y <= r; ++y)
      for (int x = -r; x <= r; ++x)
        if (t != 0 || y != 0 || x != 0) out.push_back({t, y, x});
  return out;
}

std::size_t pdv_grid_count(const VideoVolume& v, int scale, Stride stride) {
  check_scale(v, scale);
  return grid_of(v, scale, stride).count();
}

PdvMatrix extract_pdvs(const VideoVolume& v, int scale, Stride stride,
                       std::size_t sample_cap, std::uint64_t seed) {
  const VideoVolume* one[] = {&v};
  return extract_pdv_corpus(one, scale, stride, sample_cap, seed);
}

PdvMatrix extract_pdv_corpus(std::span<const VideoVolume* const> volumes, int scale,
                             Stride stride, std::size_t sample_cap, std::uint64_t seed) {
  if (volumes.empty()) throw Error(ErrorCode::EmptyInput, "no volumes to extract PDVs from");
  std::vector<Grid> grids;
  std::vector<std::uint64_t> offsets_in_corpus{0};
  for (const auto* v : volumes) {
    check_scale(*v, scale);
    grids.push_back(grid_of(*v, scale, stride));
    offsets_in_corpus.push_back(offsets_in_corpus.back() + grids.back().count());
  }
  const std::uint64_t total = offsets_in_corpus.back();

  std::vector<std::uint64_t> picks;
  if (sample_cap != kNoCap && total > sample_cap) {
    Rng rng(seed);
    picks = sample_indices(total, sample_cap, rng);
  }
  const std::uint64_t n = picks.empty() ? total : picks.size();

  const auto offsets = neighbor_offsets(scale);
  PdvMatrix m;
  m.scale = scale;
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(offsets.size()));
  const Eigen::Index col_stride = m.values.outerStride();

  std::size_t video = 0;
  for (std::uint64_t row = 0; row < n; ++row) {
    const std::uint64_t idx = picks.empty() ? row : picks[row];
    while (idx >= offsets_in_corpus[video + 1]) ++video;
    fill_row(*volumes[video], scale, stride, grids[video], offsets,
             idx - offsets_in_corpus[video], m.values.data() + row, col_stride);
  }
  return m;
}

namespace {
constexpr std::string_view kPdvMagic = "PDV1";
}

std::vector<std::uint8_t> encode_pdv_dump(const PdvMatrix& m) {
  ByteWriter w;
  w.put_tag(kPdvMagic);
  w.put_u32(static_cast<std::uint32_t>(m.dim()));
  w.put_u64(m.count());
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) w.put_f64(m.values(i, j));
  return w.take();
}

PdvMatrix decode_pdv_dump(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.get_tag() != kPdvMagic) throw Error(ErrorCode::BadMagic, "bad magic: not a PDV dump");
  const std::uint32_t dim = r.get_u32();
  const std::uint64_t count = r.get_u64();
  PdvMatrix m;
  int p = 3;
  while (pdv_dim(p) < dim) p += 2;
  if (pdv_dim(p) != dim) throw Error(ErrorCode::MalformedHeader, "PDV dump dim is not P^3-1");
  m.scale = p;
  m.values.resize(static_cast<Eigen::Index>(count), dim);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) m.values(i, j) = r.get_f64();
  return m;
}

}  // namespace phd
