#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phd/video_io.hpp"

namespace phd {

/// Labeled reference features for nearest-neighbor search.
class GallerySet {
 public:
  GallerySet(std::vector<Eigen::VectorXd> features, std::vector<int> labels);

  std::size_t size() const { return features_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.front().size()); }
  const Eigen::VectorXd& feature(std::size_t i) const { return features_[i]; }
  int label(std::size_t i) const { return labels_[i]; }
  double norm(std::size_t i) const { return norms_[i]; }

 private:
  std::vector<Eigen::VectorXd> features_;
  std::vector<int> labels_;
  std::vector<double> norms_;
};

struct Prediction {
  int label = -1;
  double similarity = 0;
  std::size_t index = 0;  // matched gallery entry
};

/// Maximum cosine similarity match; ties go to the lowest gallery index.
Prediction nn_cosine(const GallerySet& gallery, const Eigen::VectorXd& probe);

/// Most frequent label; ties by higher mean similarity, then lower label.
int vote_subvideos(std::span<const Prediction> predictions);

/// `count` consecutive blocks of `frames_each` frames starting at frame 0.
std::vector<VideoVolume> split_subvideos(const VideoVolume& v, std::size_t count,
                                         std::size_t frames_each);

}  // namespace phd
