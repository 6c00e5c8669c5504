#include "phd/codebook.hpp"

#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "phd/error.hpp"
#include "phd/log.hpp"
#include "phd/rng.hpp"

namespace phd {
namespace {

double squared_distance(const Eigen::MatrixXd& centroids, Eigen::Index row,
                        const double* point, std::size_t k) {
  double d = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const double diff = point[j] - centroids(row, static_cast<Eigen::Index>(j));
    d += diff * diff;
  }
  return d;
}

struct WeightedPoints {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> points;
  std::vector<double> weights;
};

WeightedPoints unique_codes(const BinaryCodeSet& codes) {
  std::map<std::vector<std::uint8_t>, std::size_t> counts;
  const std::size_t k = codes.bits();
  for (std::size_t n = 0; n < codes.count(); ++n)
    ++counts[std::vector<std::uint8_t>(codes.row(n), codes.row(n) + k)];
  WeightedPoints wp;
  wp.points.resize(static_cast<Eigen::Index>(counts.size()), static_cast<Eigen::Index>(k));
  Eigen::Index i = 0;
  for (const auto& [code, count] : counts) {
    for (std::size_t j = 0; j < k; ++j) wp.points(i, static_cast<Eigen::Index>(j)) = code[j];
    wp.weights.push_back(static_cast<double>(count));
    ++i;
  }
  return wp;
}

std::size_t weighted_pick(const std::vector<double>& mass, double total, Rng& rng) {
  double target = rng.uniform01() * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0) continue;
    last_positive = i;
    if (target < mass[i]) return i;
    target -= mass[i];
  }
  return last_positive;
}

}  // namespace

CodebookFit fit_codebook(const BinaryCodeSet& codes, std::size_t size, std::uint64_t seed,
                         std::size_t max_iters) {
  if (size < 2) throw Error(ErrorCode::InvalidArgument, "codebook size must be at least 2");
  if (codes.count() < size)
    throw Error(ErrorCode::InvalidArgument, "fewer codes than codewords requested");
  const WeightedPoints wp = unique_codes(codes);
  const std::size_t u = wp.weights.size();
  const std::size_t k = codes.bits();
  std::size_t d = size;
  if (u < d) {
    log::warn("only " + std::to_string(u) + " distinct codes; reducing codebook size from " +
              std::to_string(d));
    d = u;
  }
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "fewer than 2 distinct codes to cluster");

  const auto* pts = wp.points.data();
  auto point = [&](std::size_t i) { return pts + i * k; };

  CodebookFit fit;
  fit.book.scale = 0;
  Eigen::MatrixXd& c = fit.book.centroids;
  c.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));

  // k-means++ seeding.
  Rng rng(seed);
  double total_weight = 0;
  for (double w : wp.weights) total_weight += w;
  std::size_t first = weighted_pick(wp.weights, total_weight, rng);
  c.row(0) = wp.points.row(static_cast<Eigen::Index>(first));
  std::vector<double> nearest(u), mass(u);
  for (std::size_t i = 0; i < u; ++i) nearest[i] = squared_distance(c, 0, point(i), k);
  for (std::size_t j = 1; j < d; ++j) {
    double total = 0;
    for (std::size_t i = 0; i < u; ++i) total += (mass[i] = wp.weights[i] * nearest[i]);
    const std::size_t pick = weighted_pick(mass, total, rng);
    c.row(static_cast<Eigen::Index>(j)) = wp.points.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < u; ++i)
      nearest[i] = std::min(nearest[i], squared_distance(c, static_cast<Eigen::Index>(j), point(i), k));
  }

  // Lloyd iterations.
  std::vector<std::size_t> assign(u, 0), previous;
  std::vector<double> dist(u);
  for (std::size_t iter = 0;; ++iter) {
    double wcss = 0;
    for (std::size_t i = 0; i < u; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t j = 0; j < d; ++j) {
        const double dj = squared_distance(c, static_cast<Eigen::Index>(j), point(i), k);
        if (dj < best) {
          best = dj;
          arg = j;
        }
      }
      assign[i] = arg;
      dist[i] = best;
      wcss += wp.weights[i] * best;
    }
    fit.wcss_trace.push_back(wcss);
    if (assign == previous || iter == max_iters) break;
    previous = assign;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
    std::vector<double> mass_per(d, 0.0);
    for (std::size_t i = 0; i < u; ++i) {
      sums.row(static_cast<Eigen::Index>(assign[i])) += wp.weights[i] * wp.points.row(static_cast<Eigen::Index>(i));
      mass_per[assign[i]] += wp.weights[i];
    }
    for (std::size_t j = 0; j < d; ++j)
      if (mass_per[j] > 0)
        c.row(static_cast<Eigen::Index>(j)) = sums.row(static_cast<Eigen::Index>(j)) / mass_per[j];
    for (std::size_t i = 0; i < u; ++i)
      dist[i] = squared_distance(c, static_cast<Eigen::Index>(assign[i]), point(i), k);
    // Empty clusters move onto the point farthest from its own centroid.
    for (std::size_t j = 0; j < d; ++j) {
      if (mass_per[j] > 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < u; ++i)
        if (dist[i] > dist[far]) far = i;
      c.row(static_cast<Eigen::Index>(j)) = wp.points.row(static_cast<Eigen::Index>(far));
      dist[far] = 0;
    }
  }
  return fit;
}

std::size_t nearest_codeword(const Codebook& book, const std::uint8_t* code) {
  const std::size_t k = book.bits();
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t j = 0; j < book.size(); ++j) {
    double d = 0;
    for (std::size_t b = 0; b < k; ++b) {
      const double diff = code[b] - book.centroids(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b));
      d += diff * diff;
    }
    if (d < best) {
      best = d;
      arg = j;
    }
  }
  return arg;
}

std::vector<std::size_t> codeword_counts(const Codebook& book, const BinaryCodeSet& codes) {
  if (codes.count() == 0) throw Error(ErrorCode::EmptyInput, "cannot encode an empty code set");
  if (codes.bits() != book.bits())
    throw Error(ErrorCode::DimensionMismatch, "code length differs from codebook");
  std::vector<std::size_t> counts(book.size(), 0);
  const std::size_t k = codes.bits();
  if (k <= 64) {
    std::unordered_map<std::uint64_t, std::size_t> memo;
    for (std::size_t n = 0; n < codes.count(); ++n) {
      std::uint64_t key = 0;
      for (std::size_t b = 0; b < k; ++b) key |= std::uint64_t{codes.at(n, b)} << b;
      auto it = memo.find(key);
      if (it == memo.end()) it = memo.emplace(key, nearest_codeword(book, codes.row(n))).first;
      ++counts[it->second];
    }
  } else {
    for (std::size_t n = 0; n < codes.count(); ++n) ++counts[nearest_codeword(book, codes.row(n))];
  }
  return counts;
}

Eigen::VectorXd encode_histogram(const Codebook& book, const BinaryCodeSet& codes) {
  const auto counts = codeword_counts(book, codes);
  Eigen::VectorXd h(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t j = 0; j < counts.size(); ++j) h(static_cast<Eigen::Index>(j)) = static_cast<double>(counts[j]);
  return h / h.norm();
}

}  // namespace phd
