#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phd/codebook.hpp"
#include "phd/hashlearn.hpp"
#include "phd/pdv.hpp"
#include "phd/video_io.hpp"

namespace phd {

/// Hash functions and dictionary learned for one neighborhood size.
struct ScaleModel {
  HashModel hash;
  Codebook codebook;

  int scale() const { return hash.scale; }
};

struct EncodeOptions {
  Stride stride;
  std::size_t sample_cap = 50000;  // per video per scale; 0 = no cap
};

/// Per-scale L2-normalized histograms concatenated in ascending scale order.
Eigen::VectorXd encode_video(const VideoVolume& v, std::span<const ScaleModel> models,
                             const EncodeOptions& options, std::uint64_t seed);

struct PcaModel {
  Eigen::VectorXd mean;           // input_dim
  Eigen::MatrixXd basis;          // input_dim × output_dim, orthonormal columns
  Eigen::VectorXd eigenvalues;    // output_dim, descending; sample variance per component

  std::size_t input_dim() const { return static_cast<std::size_t>(basis.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(basis.cols()); }
};

struct FeatureVector {
  Eigen::VectorXd values;
  std::vector<int> scales;
  std::uint64_t bundle_id = 0;
};

/// PCA from training rows (one raw feature per row). The output dimension is
/// clamped to the numerical rank with a warning.
PcaModel fit_pca(const Eigen::MatrixXd& samples, std::size_t output_dim);

Eigen::VectorXd project(const PcaModel& pca, const Eigen::VectorXd& raw);

}  // namespace phd
