#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "phd/pdv.hpp"

namespace phd {

/// Weights of the three penalty terms added to the uniformity term.
struct HashLambdas {
  double quantization = 1000.0;  // λ1, on J2
  double balance = 100.0;        // λ2, on J3
  double variance = 1000000.0;   // λ3, on J4 (subtracted)

  bool operator==(const HashLambdas&) const = default;
};

/// K linear hash functions for one neighborhood size.
struct HashModel {
  int scale = 3;
  Eigen::MatrixXd projections;  // (P³−1) × K, column k is w_k
  HashLambdas lambdas;

  std::size_t bits() const { return static_cast<std::size_t>(projections.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(projections.rows()); }
};

/// N binary codes of K bits, stored row-major as 0/1 bytes.
class BinaryCodeSet {
 public:
  BinaryCodeSet() = default;
  BinaryCodeSet(std::size_t bits, std::vector<std::uint8_t> codes);

  std::size_t bits() const { return bits_; }
  std::size_t count() const { return bits_ == 0 ? 0 : codes_.size() / bits_; }
  std::uint8_t at(std::size_t n, std::size_t k) const { return codes_[n * bits_ + k]; }
  const std::uint8_t* row(std::size_t n) const { return codes_.data() + n * bits_; }
  const std::vector<std::uint8_t>& codes() const { return codes_; }
  const std::vector<double>& bit_means() const { return bit_means_; }

  // (b − 0.5) as an N×K real matrix.
  Eigen::MatrixXd centered() const;

  bool operator==(const BinaryCodeSet& o) const { return bits_ == o.bits_ && codes_ == o.codes_; }

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint8_t> codes_;
  std::vector<double> bit_means_;
};

struct ObjectiveTerms {
  double total = 0;
  double uniformity = 0;    // J1
  double quantization = 0;  // J2
  double balance = 0;       // J3
  double variance = 0;      // J4' (enters the total with a minus sign)
};

/// b_kn = 1 when w_kᵀx_n >= 0, else 0.
BinaryCodeSet binarize(const HashModel& model, const PdvMatrix& x);

/// The exact four-term objective on binary codes.
ObjectiveTerms eval_objective(const HashModel& model, const PdvMatrix& x,
                              const BinaryCodeSet& b);

/// Relaxed objective: (b − 0.5) replaced by wᵀx inside the uniformity,
/// balance and variance terms; the quantization term keeps b fixed.
ObjectiveTerms relaxed_objective(const HashModel& model, const PdvMatrix& x,
                                 const BinaryCodeSet& b);

/// Gradient of the relaxed objective with respect to the projections.
Eigen::MatrixXd relaxed_gradient(const HashModel& model, const PdvMatrix& x,
                                 const BinaryCodeSet& b);

enum class LineSearch {
  Cayley,  // backtracking along an orthogonality-preserving Cayley curve
  Armijo,  // backtracking along the (rescaled) negative gradient, W unconstrained
};

struct HashTrainOptions {
  std::size_t bits = 15;
  HashLambdas lambdas;
  std::size_t iterations = 20;    // outer B-step/W-step rounds
  std::size_t descent_steps = 5;  // line-searched steps per W-step
  LineSearch search = LineSearch::Cayley;
  std::uint64_t seed = 0;

  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  std::size_t max_backtracks = 30;
};

struct HashTrainResult {
  HashModel model;
  // Relaxed objective at initialization and after every W-step.
  std::vector<double> relaxed_trace;
  // Exact objective after every B-step (including the initial one).
  std::vector<ObjectiveTerms> objective_trace;
};

// Top-`bits` eigenvectors of XᵀX (descending), largest-magnitude entry of
// each column positive. Rank-deficient data is padded with seeded random
// orthonormal directions and a warning.
Eigen::MatrixXd eigen_init(const PdvMatrix& x, std::size_t bits, std::uint64_t seed);

HashTrainResult train_hash(const PdvMatrix& x, const HashTrainOptions& options);

}  // namespace phd
