#include "phd/features.hpp"

#include <algorithm>
#include <string>

#include "phd/error.hpp"
#include "phd/log.hpp"
#include "phd/rng.hpp"

namespace phd {

Eigen::VectorXd encode_video(const VideoVolume& v, std::span<const ScaleModel> models,
                             const EncodeOptions& options, std::uint64_t seed) {
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "no scale models to encode with");
  std::vector<const ScaleModel*> ordered;
  for (const auto& m : models) ordered.push_back(&m);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ScaleModel* a, const ScaleModel* b) { return a->scale() < b->scale(); });
  const auto largest = static_cast<std::size_t>(ordered.back()->scale());
  if (v.frames() < largest || v.height() < largest || v.width() < largest)
    throw Error(ErrorCode::InvalidArgument, "volume too small for the largest neighborhood");

  std::vector<Eigen::VectorXd> blocks;
  Eigen::Index total = 0;
  for (const auto* m : ordered) {
    const auto pdvs = extract_pdvs(v, m->scale(), options.stride, options.sample_cap,
                                   derive_seed(seed, static_cast<std::uint64_t>(m->scale())));
    blocks.push_back(encode_histogram(m->codebook, binarize(m->hash, pdvs)));
    total += blocks.back().size();
  }
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.segment(at, b.size()) = b;
    at += b.size();
  }
  return out;
}

PcaModel fit_pca(const Eigen::MatrixXd& samples, std::size_t output_dim) {
  const Eigen::Index n = samples.rows(), dim = samples.cols();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least 2 samples");
  if (output_dim < 1) throw Error(ErrorCode::InvalidArgument, "PCA output dimension must be >= 1");
  PcaModel pca;
  pca.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - pca.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  // Eigenpairs in descending order; the Gram route is used when samples are
  // fewer than dimensions.
  const bool gram = dim > n;
  const Eigen::MatrixXd scatter =
      gram ? Eigen::MatrixXd(centered * centered.transpose() / denom)
           : Eigen::MatrixXd(centered.transpose() * centered / denom);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "PCA eigendecomposition failed");
  const Eigen::Index m = scatter.rows();
  const double top = std::max(eig.eigenvalues()(m - 1), 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index j = m - 1; j >= 0; --j)
    if (top > 0 && eig.eigenvalues()(j) > top * 1e-10) ++rank;
  rank = std::min(rank, n - 1);

  auto keep = static_cast<Eigen::Index>(output_dim);
  if (keep > rank) {
    log::warn("PCA output dimension " + std::to_string(output_dim) + " clamped to rank " +
              std::to_string(rank));
    keep = rank;
  }
  if (keep < 1) throw Error(ErrorCode::InvalidArgument, "PCA training data has zero variance");

  pca.basis.resize(dim, keep);
  pca.eigenvalues.resize(keep);
  for (Eigen::Index j = 0; j < keep; ++j) {
    const Eigen::Index src = m - 1 - j;
    const double lambda = eig.eigenvalues()(src);
    pca.eigenvalues(j) = lambda;
    if (gram) {
      Eigen::VectorXd b = centered.transpose() * eig.eigenvectors().col(src);
      for (Eigen::Index p = 0; p < j; ++p) b -= pca.basis.col(p).dot(b) * pca.basis.col(p);
      pca.basis.col(j) = b.normalized();
    } else {
      pca.basis.col(j) = eig.eigenvectors().col(src);
    }
    Eigen::Index arg = 0;
    pca.basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (pca.basis(arg, j) < 0) pca.basis.col(j) = -pca.basis.col(j);
  }
  return pca;
}

Eigen::VectorXd project(const PcaModel& pca, const Eigen::VectorXd& raw) {
  if (static_cast<std::size_t>(raw.size()) != pca.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "raw feature length differs from PCA input dimension");
  return pca.basis.transpose() * (raw - pca.mean);
}

}  // namespace phd
