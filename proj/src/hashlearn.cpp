#include "phd/hashlearn.hpp"

#include <cmath>
#include <string>

#include "phd/error.hpp"
#include "phd/log.hpp"
#include "phd/rng.hpp"

namespace phd {

BinaryCodeSet::BinaryCodeSet(std::size_t bits, std::vector<std::uint8_t> codes)
    : bits_(bits), codes_(std::move(codes)), bit_means_(bits, 0.0) {
  if (bits_ == 0) throw Error(ErrorCode::InvalidArgument, "code length must be positive");
  if (codes_.size() % bits_ != 0)
    throw Error(ErrorCode::DimensionMismatch, "code buffer is not a multiple of the bit count");
  const std::size_t n = count();
  std::vector<std::size_t> ones(bits_, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < bits_; ++k) {
      const auto b = codes_[i * bits_ + k];
      if (b > 1) throw Error(ErrorCode::InvalidArgument, "binary codes must be 0 or 1");
      ones[k] += b;
    }
  if (n > 0)
    for (std::size_t k = 0; k < bits_; ++k)
      bit_means_[k] = static_cast<double>(ones[k]) / static_cast<double>(n);
}

Eigen::MatrixXd BinaryCodeSet::centered() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(count()), static_cast<Eigen::Index>(bits_));
  for (std::size_t n = 0; n < count(); ++n)
    for (std::size_t k = 0; k < bits_; ++k)
      m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = at(n, k) - 0.5;
  return m;
}

namespace {

void check_model_input(const HashModel& model, const PdvMatrix& x) {
  if (model.projections.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "hash model has no projections");
  if (x.dim() != model.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "PDV dim " + std::to_string(x.dim()) + " != model dim " + std::to_string(model.dim()));
}

void check_codes(const HashModel& model, const PdvMatrix& x, const BinaryCodeSet& b) {
  check_model_input(model, x);
  if (b.bits() != model.bits() || b.count() != x.count())
    throw Error(ErrorCode::DimensionMismatch, "binary codes do not match model/PDV shapes");
}

BinaryCodeSet threshold(const Eigen::MatrixXd& projected) {
  const auto n = static_cast<std::size_t>(projected.rows());
  const auto k = static_cast<std::size_t>(projected.cols());
  std::vector<std::uint8_t> codes(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j)
      codes[i * k + j] = projected(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= 0.0;
  return BinaryCodeSet(k, std::move(codes));
}

// Relaxed terms from V = XW and C = B − 0.5.
ObjectiveTerms relaxed_terms(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                             const HashLambdas& lambdas) {
  const Eigen::Index k = v.cols();
  ObjectiveTerms t;
  if (k > 1) {
    const Eigen::MatrixXd diff = v.leftCols(k - 1) - v.rightCols(k - 1);
    t.uniformity = (diff.rowwise().squaredNorm().array() - 1.0).square().sum();
  } else {
    t.uniformity = static_cast<double>(v.rows());
  }
  t.quantization = (c - v).squaredNorm();
  t.balance = v.colwise().sum().squaredNorm();
  t.variance = (v.rowwise() - v.colwise().mean()).squaredNorm();
  t.total = t.uniformity + lambdas.quantization * t.quantization +
            lambdas.balance * t.balance - lambdas.variance * t.variance;
  return t;
}

// dJ̃/dV.
Eigen::MatrixXd relaxed_grad_projected(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                                       const HashLambdas& lambdas) {
  const Eigen::Index k = v.cols();
  Eigen::MatrixXd g = -2.0 * lambdas.quantization * (c - v);
  const Eigen::RowVectorXd col_sum = v.colwise().sum();
  g.rowwise() += 2.0 * lambdas.balance * col_sum;
  g -= 2.0 * lambdas.variance * (v.rowwise() - v.colwise().mean());
  if (k > 1) {
    const Eigen::MatrixXd diff = v.leftCols(k - 1) - v.rightCols(k - 1);
    const Eigen::VectorXd coef = 4.0 * (diff.rowwise().squaredNorm().array() - 1.0).matrix();
    const Eigen::MatrixXd scaled = diff.array().colwise() * coef.array();
    g.leftCols(k - 1) += scaled;
    g.rightCols(k - 1) -= scaled;
  }
  return g;
}

void fix_signs(Eigen::MatrixXd& w) {
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    Eigen::Index arg = 0;
    w.col(j).cwiseAbs().maxCoeff(&arg);
    if (w(arg, j) < 0) w.col(j) = -w.col(j);
  }
}

}  // namespace

BinaryCodeSet binarize(const HashModel& model, const PdvMatrix& x) {
  check_model_input(model, x);
  return threshold(x.values * model.projections);
}

ObjectiveTerms eval_objective(const HashModel& model, const PdvMatrix& x,
                              const BinaryCodeSet& b) {
  check_codes(model, x, b);
  const std::size_t n = b.count(), k = b.bits();
  const Eigen::MatrixXd v = x.values * model.projections;
  const auto& mu = b.bit_means();
  ObjectiveTerms t;
  std::vector<double> bit_sum(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double transitions = 0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const double d = double(b.at(i, j)) - double(b.at(i, j + 1));
      transitions += d * d;
    }
    t.uniformity += (transitions - 1.0) * (transitions - 1.0);
    for (std::size_t j = 0; j < k; ++j) {
      const double c = b.at(i, j) - 0.5;
      const double q = c - v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      t.quantization += q * q;
      bit_sum[j] += c;
      const double dev = b.at(i, j) - mu[j];
      t.variance += dev * dev;
    }
  }
  for (double s : bit_sum) t.balance += s * s;
  const auto& l = model.lambdas;
  t.total = t.uniformity + l.quantization * t.quantization + l.balance * t.balance -
            l.variance * t.variance;
  return t;
}

ObjectiveTerms relaxed_objective(const HashModel& model, const PdvMatrix& x,
                                 const BinaryCodeSet& b) {
  check_codes(model, x, b);
  return relaxed_terms(x.values * model.projections, b.centered(), model.lambdas);
}

Eigen::MatrixXd relaxed_gradient(const HashModel& model, const PdvMatrix& x,
                                 const BinaryCodeSet& b) {
  check_codes(model, x, b);
  const Eigen::MatrixXd v = x.values * model.projections;
  return x.values.transpose() * relaxed_grad_projected(v, b.centered(), model.lambdas);
}

Eigen::MatrixXd eigen_init(const PdvMatrix& x, std::size_t bits, std::uint64_t seed) {
  const auto dim = static_cast<Eigen::Index>(x.dim());
  const auto k = static_cast<Eigen::Index>(bits);
  if (k > dim)
    throw Error(ErrorCode::InvalidArgument, "more hash bits than PDV dimensions");
  const Eigen::MatrixXd scatter = x.values.transpose() * x.values;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::InvalidArgument, "eigendecomposition of XXᵀ failed");
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const double top = values(dim - 1);
  const double tol = std::max(top, 0.0) * 1e-10;

  Eigen::MatrixXd w(dim, k);
  Eigen::Index informative = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index src = dim - 1 - j;
    if (top <= 0.0 || values(src) <= tol) break;
    w.col(j) = eig.eigenvectors().col(src);
    ++informative;
  }
  if (informative < k) {
    log::warn("degenerate PDV covariance: rank " + std::to_string(informative) + " < " +
              std::to_string(k) + " bits; padding with random directions");
    Rng rng(seed);
    for (Eigen::Index j = informative; j < k; ++j) {
      Eigen::VectorXd c(dim);
      for (;;) {
        for (Eigen::Index i = 0; i < dim; ++i) c(i) = rng.normal();
        for (Eigen::Index p = 0; p < j; ++p) c -= w.col(p).dot(c) * w.col(p);
        for (Eigen::Index p = 0; p < j; ++p) c -= w.col(p).dot(c) * w.col(p);
        if (c.norm() > 1e-6) break;
      }
      w.col(j) = c.normalized();
    }
  }
  fix_signs(w);
  return w;
}

namespace {

// Takes `next` if its objective, recomputed from scratch, does not exceed
// `current`; `xw` tracks XW for the stored W. The shortcut evaluation used during the search may differ from
// it by rounding.
bool accept(const PdvMatrix& x, const Eigen::MatrixXd& c, HashModel& model,
            Eigen::MatrixXd next, Eigen::MatrixXd& xw, double& current) {
  Eigen::MatrixXd projected = x.values * next;
  const double value = relaxed_terms(projected, c, model.lambdas).total;
  if (!std::isfinite(value) || value > current) return false;
  model.projections = std::move(next);
  xw = std::move(projected);
  current = value;
  return true;
}

// One backtracking step along W + αD. Returns true if a step was taken.
bool armijo_step(const PdvMatrix& x, const Eigen::MatrixXd& c, HashModel& model,
                 Eigen::MatrixXd& xw, double& current, double& step,
                 const HashTrainOptions& o) {
  const Eigen::MatrixXd& v = xw;
  const Eigen::MatrixXd grad = x.values.transpose() * relaxed_grad_projected(v, c, model.lambdas);
  const double gnorm = grad.norm();
  if (!(gnorm > 0.0) || !std::isfinite(gnorm)) return false;
  // Steps are measured relative to ‖W‖ so that the unit initial step is
  // meaningful whatever the gradient magnitude.
  const double scale = std::max(model.projections.norm(), 1.0) / gnorm;
  const Eigen::MatrixXd dir = -scale * grad;
  const Eigen::MatrixXd dv = x.values * dir;
  const double slope = -scale * gnorm * gnorm;  // <grad, dir>
  double alpha = step;
  for (std::size_t i = 0; i <= o.max_backtracks; ++i, alpha *= o.shrink) {
    const double trial = relaxed_terms(v + alpha * dv, c, model.lambdas).total;
    if (std::isfinite(trial) && trial <= current + o.sufficient_decrease * alpha * slope) {
      step = std::min(o.initial_step, alpha / o.shrink);
      return accept(x, c, model, model.projections + alpha * dir, xw, current);
    }
  }
  return false;
}

// Backtracking along the Cayley curve
//   Y(τ) = (I + τ/2 A)⁻¹(I − τ/2 A)W,  A = GWᵀ − WGᵀ scaled to unit norm,
// which keeps WᵀW fixed. With A = UVᵀ, U = [G, W], V = [W, −G] this is
//   Y(τ) = W − τU(I + τ/2 VᵀU)⁻¹VᵀW,
// so XY(τ) only needs XU and small 2K×2K solves per trial.
bool cayley_step(const PdvMatrix& x, const Eigen::MatrixXd& c, HashModel& model,
                 Eigen::MatrixXd& xw, double& current, double& step,
                 const HashTrainOptions& o) {
  const Eigen::MatrixXd& w = model.projections;
  const Eigen::Index k = w.cols();
  const Eigen::MatrixXd& v = xw;
  const Eigen::MatrixXd grad = x.values.transpose() * relaxed_grad_projected(v, c, model.lambdas);
  const double anorm = (grad * w.transpose() - w * grad.transpose()).norm();
  if (!(anorm > 0.0) || !std::isfinite(anorm)) return false;
  Eigen::MatrixXd u(w.rows(), 2 * k), vv(w.rows(), 2 * k);
  u << grad / anorm, w / anorm;
  vv << w, -grad;
  Eigen::MatrixXd xu(x.values.rows(), 2 * k);
  xu << x.values * grad / anorm, v / anorm;
  const Eigen::MatrixXd vtu = vv.transpose() * u;
  const Eigen::MatrixXd vtw = vv.transpose() * w;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2 * k, 2 * k);
  const double slope = -0.5 * anorm;
  double tau = step;
  for (std::size_t i = 0; i <= o.max_backtracks; ++i, tau *= o.shrink) {
    const Eigen::MatrixXd m = (id + 0.5 * tau * vtu).partialPivLu().solve(vtw);
    const double trial = relaxed_terms(v - tau * xu * m, c, model.lambdas).total;
    if (std::isfinite(trial) && trial <= current + o.sufficient_decrease * tau * slope) {
      step = std::min(o.initial_step, tau / o.shrink);
      return accept(x, c, model, w - tau * u * m, xw, current);
    }
  }
  return false;
}

}  // namespace

HashTrainResult train_hash(const PdvMatrix& x, const HashTrainOptions& options) {
  if (options.bits < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 hash bits");
  if (x.count() < options.bits)
    throw Error(ErrorCode::InvalidArgument, "need at least as many PDVs as hash bits");
  HashTrainResult r;
  r.model.scale = x.scale;
  r.model.lambdas = options.lambdas;
  r.model.projections = eigen_init(x, options.bits, options.seed);

  Eigen::MatrixXd xw = x.values * r.model.projections;
  BinaryCodeSet codes = threshold(xw);
  Eigen::MatrixXd centered = codes.centered();
  double current = relaxed_terms(xw, centered, r.model.lambdas).total;
  r.relaxed_trace.push_back(current);
  r.objective_trace.push_back(eval_objective(r.model, x, codes));

  // Accepted steps warm-start the next search one expansion above them.
  double step = options.initial_step;
  for (std::size_t it = 0; it < options.iterations; ++it) {
    for (std::size_t s = 0; s < options.descent_steps; ++s) {
      const bool moved = options.search == LineSearch::Cayley
                             ? cayley_step(x, centered, r.model, xw, current, step, options)
                             : armijo_step(x, centered, r.model, xw, current, step, options);
      if (!moved) break;
    }
    r.relaxed_trace.push_back(current);
    // Same V, codes at least as close: the recomputed value cannot rise.
    codes = threshold(xw);
    centered = codes.centered();
    current = relaxed_terms(xw, centered, r.model.lambdas).total;
    r.objective_trace.push_back(eval_objective(r.model, x, codes));
  }
  return r;
}

}  // namespace phd
