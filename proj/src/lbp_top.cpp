#include "phd/lbp_top.hpp"

#include <cmath>
#include <numbers>

#include "phd/error.hpp"

namespace phd {

std::vector<std::array<int, 2>> lbp_circle_offsets(int radius, int neighbors) {
  std::vector<std::array<int, 2>> out;
  for (int p = 0; p < neighbors; ++p) {
    const double a = 2.0 * std::numbers::pi * p / neighbors;
    out.push_back({static_cast<int>(std::lround(radius * std::cos(a))),
                   static_cast<int>(std::lround(-radius * std::sin(a)))});
  }
  return out;
}

Eigen::VectorXd lbp_top_baseline(const VideoVolume& v, int radius, int neighbors) {
  if (radius < 1 || neighbors < 1 || neighbors > 16)
    throw Error(ErrorCode::InvalidArgument, "LBP-TOP needs radius >= 1 and 1..16 neighbors");
  const auto span = static_cast<std::size_t>(2 * radius + 1);
  if (v.frames() < span || v.height() < span || v.width() < span)
    throw Error(ErrorCode::InvalidArgument, "volume too small for the LBP-TOP radius");
  const auto ring = lbp_circle_offsets(radius, neighbors);
  const std::size_t bins = std::size_t{1} << neighbors;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * bins));
  const auto r = static_cast<std::size_t>(radius);
  for (std::size_t t = r; t + r < v.frames(); ++t)
    for (std::size_t y = r; y + r < v.height(); ++y)
      for (std::size_t x = r; x + r < v.width(); ++x) {
        const int c = v.at(t, y, x);
        std::size_t xy = 0, xt = 0, yt = 0;
        for (std::size_t p = 0; p < ring.size(); ++p) {
          const int a = ring[p][0], b = ring[p][1];
          xy |= std::size_t{v.at(t, y + b, x + a) >= c} << p;
          xt |= std::size_t{v.at(t + b, y, x + a) >= c} << p;
          yt |= std::size_t{v.at(t + b, y + a, x) >= c} << p;
        }
        h(static_cast<Eigen::Index>(xy)) += 1;
        h(static_cast<Eigen::Index>(bins + xt)) += 1;
        h(static_cast<Eigen::Index>(2 * bins + yt)) += 1;
      }
  return h / h.norm();
}

}  // namespace phd
