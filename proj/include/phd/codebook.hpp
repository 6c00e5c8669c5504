#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "phd/hashlearn.hpp"

namespace phd {

/// D real-valued codewords over K-bit binary codes for one scale.
struct Codebook {
  int scale = 3;
  Eigen::MatrixXd centroids;  // D × K, entries in [0, 1]

  std::size_t size() const { return static_cast<std::size_t>(centroids.rows()); }
  std::size_t bits() const { return static_cast<std::size_t>(centroids.cols()); }
};

struct CodebookFit {
  Codebook book;
  std::vector<double> wcss_trace;  // one entry per assignment pass
};

/// k-means (k-means++ seeding, Euclidean) over the codes. Duplicate codes are
/// collapsed into weighted points, which leaves the result unchanged.
CodebookFit fit_codebook(const BinaryCodeSet& codes, std::size_t size, std::uint64_t seed,
                         std::size_t max_iters = 100);

// Index of the nearest codeword; ties go to the lowest index.
std::size_t nearest_codeword(const Codebook& book, const std::uint8_t* code);

// Raw per-codeword counts.
std::vector<std::size_t> codeword_counts(const Codebook& book, const BinaryCodeSet& codes);

/// L2-normalized codeword histogram.
Eigen::VectorXd encode_histogram(const Codebook& book, const BinaryCodeSet& codes);

}  // namespace phd
