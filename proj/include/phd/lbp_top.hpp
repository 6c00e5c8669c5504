#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "phd/video_io.hpp"

namespace phd {

// Integer sampling offsets on a circle of `radius`, rounded to the nearest
// pixel: first component along the plane's horizontal axis, second along its
// vertical axis. radius 1 with 8 neighbors gives the 3×3 ring.
std::vector<std::array<int, 2>> lbp_circle_offsets(int radius, int neighbors);

/// LBP histograms on the XY, XT and YT planes through every interior voxel,
/// concatenated (3 × 2^neighbors bins) and L2-normalized.
Eigen::VectorXd lbp_top_baseline(const VideoVolume& v, int radius = 1, int neighbors = 8);

}  // namespace phd
