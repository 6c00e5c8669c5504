#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phd/bundle.hpp"
#include "phd/config.hpp"
#include "phd/video_io.hpp"

namespace phd {

struct Split {
  std::vector<std::size_t> train;  // dataset indices, ascending
  std::vector<std::size_t> test;
};

/// Per-class random halves: ⌈n/2⌉ of each class train, the rest test.
Split stratified_halves(std::span<const int> labels, std::uint64_t seed);

/// Each class's videos shuffled and dealt round-robin over `folds` folds;
/// fold f is the test set of split f.
std::vector<Split> stratified_folds(std::span<const int> labels, std::size_t folds,
                                    std::uint64_t seed);

/// Trains hash functions and a codebook per configured scale on `train`.
std::vector<ScaleModel> train_scale_models(const ExperimentConfig& config,
                                           std::span<const VideoVolume* const> train,
                                           std::uint64_t seed);

/// Trains scale models and PCA on the given volumes.
ModelBundle train_bundle(const ExperimentConfig& config,
                         std::span<const VideoVolume* const> train);

// Encoding seed of one video (or sub-video) in a dataset.
std::uint64_t encode_seed(std::uint64_t seed, std::size_t video, std::size_t sub = 0);

struct RepeatResult {
  std::size_t repeat = 0;
  double accuracy = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

struct VideoPrediction {
  std::size_t repeat = 0;
  std::size_t video = 0;  // dataset index
  int true_label = 0;
  int predicted_label = 0;
  double similarity = 0;  // mean similarity of the winning label's votes
};

struct Report {
  std::string protocol;
  std::vector<RepeatResult> repeats;
  std::vector<VideoPrediction> predictions;

  double mean() const;
  double stddev() const;  // sample standard deviation, 0 for one repeat
  std::string to_csv() const;
  std::string to_table() const;
  // `video_path,true_label,predicted_label,similarity`, all repeats in order.
  std::string predictions_csv(const DatasetManifest& manifest) const;
};

enum class Method {
  Hashing,  // learned PDV hashing + codebook + PCA
  LbpTop,   // radius-1, 8-neighbor LBP-TOP histograms
};

/// Runs the configured evaluation protocol over a loaded dataset.
Report run_protocol(const ExperimentConfig& config, const Dataset& data,
                    Method method = Method::Hashing);

}  // namespace phd
