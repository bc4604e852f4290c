#include "distinctbo/gp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "distinctbo/errors.h"
#include "distinctbo/optimize.h"

namespace distinctbo {

namespace {

const double kSqrt5 = std::sqrt(5.0);

// Pairwise squared coordinate differences, one n x n matrix per dimension.
std::vector<Eigen::MatrixXd> squared_differences(const Eigen::MatrixXd& x) {
  const Eigen::Index d = x.rows(), n = x.cols();
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(d), Eigen::MatrixXd(n, n));
  for (Eigen::Index k = 0; k < d; ++k) {
    auto& m = out[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = x(k, i) - x(k, j);
        m(i, j) = diff * diff;
      }
    }
  }
  return out;
}

// Matérn 5/2 kernel between the columns of a (dim x n) and b (dim x m).
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const Eigen::VectorXd& lengthscales, double signal) {
  const Eigen::MatrixXd sa = lengthscales.cwiseInverse().asDiagonal() * a;
  const Eigen::MatrixXd sb = lengthscales.cwiseInverse().asDiagonal() * b;
  Eigen::ArrayXXd r2(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    r2.col(j) = (sa.colwise() - sb.col(j)).colwise().squaredNorm().transpose().array();
  }
  const Eigen::ArrayXXd r = r2.sqrt();
  return (signal * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2) * (-kSqrt5 * r).exp()).matrix();
}

double lml_from_differences(const std::vector<Eigen::MatrixXd>& diffs, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& log_params, double noise,
                            Eigen::VectorXd* grad) {
  const Eigen::Index n = y.size();
  const auto d = static_cast<Eigen::Index>(diffs.size());
  const Eigen::VectorXd inv_l2 = (-2.0 * log_params.head(d)).array().exp();
  const double signal = std::exp(log_params[d]);

  Eigen::MatrixXd r2 = inv_l2[0] * diffs[0];
  for (Eigen::Index k = 1; k < d; ++k) r2 += inv_l2[k] * diffs[static_cast<std::size_t>(k)];
  const Eigen::ArrayXXd r = r2.array().sqrt();
  const Eigen::ArrayXXd e = (-kSqrt5 * r).exp();
  Eigen::MatrixXd kmat = (signal * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2.array()) * e).matrix();
  kmat.diagonal().array() += noise;

  const Eigen::LLT<Eigen::MatrixXd> llt(kmat);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd alpha = llt.solve(y);
  const double log_det_half = llt.matrixLLT().diagonal().array().log().sum();
  const double value = -0.5 * y.dot(alpha) - log_det_half -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(value)) return -std::numeric_limits<double>::infinity();

  if (grad != nullptr) {
    grad->resize(d + 1);
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
    llt.solveInPlace(w);
    w = alpha * alpha.transpose() - w;
    // dK/dlog l_k = signal * 5/3 (1 + sqrt5 r) exp(-sqrt5 r) * D_k / l_k^2
    const Eigen::ArrayXXd wr = w.array() * ((signal * (5.0 / 3.0)) * (1.0 + kSqrt5 * r) * e);
    for (Eigen::Index k = 0; k < d; ++k) {
      (*grad)[k] = 0.5 * inv_l2[k] * (wr * diffs[static_cast<std::size_t>(k)].array()).sum();
    }
    (*grad)[d] = 0.5 * ((w.array() * kmat.array()).sum() - noise * w.trace());
  }
  return value;
}

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

double matern52(double r) {
  return (1.0 + kSqrt5 * r + (5.0 / 3.0) * r * r) * std::exp(-kSqrt5 * r);
}

double gp_log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& log_params, double noise_variance,
                                  Eigen::VectorXd* grad) {
  if (log_params.size() != x.rows() + 1 || y.size() != x.cols()) {
    throw std::invalid_argument("hyperparameter or target size mismatch");
  }
  return lml_from_differences(squared_differences(x), y, log_params, noise_variance, grad);
}

GPModel GPModel::with_hyperparameters(std::vector<Observation> observations,
                                      GPHyperparameters hyperparameters) {
  if (observations.empty()) throw std::invalid_argument("GP needs observations");
  GPModel model;
  const Eigen::Index d = observations.front().point.dim();
  const auto n = static_cast<Eigen::Index>(observations.size());
  model.inputs_.resize(d, n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = observations[static_cast<std::size_t>(i)];
    if (obs.point.dim() != d) throw std::invalid_argument("observation dimension mismatch");
    if (!std::isfinite(obs.value)) throw std::invalid_argument("non-finite observation value");
    model.inputs_.col(i) = obs.point.log_coords();
    y[i] = obs.value;
  }
  model.offset_ = y.mean();
  const double var = n > 1 ? (y.array() - model.offset_).square().sum() / static_cast<double>(n - 1) : 0.0;
  model.scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  model.standardized_ = (y.array() - model.offset_) / model.scale_;
  if (hyperparameters.lengthscales.size() != d) {
    throw std::invalid_argument("lengthscale count does not match input dimension");
  }
  model.hyper_ = std::move(hyperparameters);
  model.observations_ = std::move(observations);
  model.factorize();
  return model;
}

void GPModel::factorize() {
  const Eigen::MatrixXd kmat = cross_kernel(inputs_, inputs_, hyper_.lengthscales, hyper_.signal_variance);
  const double ceiling = std::max(1e-4, hyper_.noise_variance) * (1.0 + 1e-9);
  for (double noise = hyper_.noise_variance; noise <= ceiling; noise *= 10.0) {
    Eigen::MatrixXd km = kmat;
    km.diagonal().array() += noise;
    Eigen::LLT<Eigen::MatrixXd> llt(km);
    if (llt.info() == Eigen::Success) {
      hyper_.noise_variance = noise;
      chol_inverse_ = Eigen::MatrixXd::Identity(kmat.rows(), kmat.cols());
      llt.matrixL().solveInPlace(chol_inverse_);
      alpha_ = llt.solve(standardized_);
      return;
    }
  }
  throw NumericalError("GP kernel matrix is not positive definite");
}

GPModel GPModel::fit(std::vector<Observation> observations, const GPOptions& options, Rng& rng,
                     const GPHyperparameters* warm_start) {
  if (observations.size() < 2) throw std::invalid_argument("GP fit needs at least 2 observations");
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (!std::isfinite(observations[i].value)) throw std::invalid_argument("non-finite observation value");
    for (std::size_t j = 0; j < i; ++j) {
      const double gap = (observations[i].point.log_coords() - observations[j].point.log_coords())
                             .lpNorm<Eigen::Infinity>();
      if (gap <= options.duplicate_tolerance) {
        throw std::invalid_argument("duplicate GP training points");
      }
    }
  }

  const Eigen::Index d = observations.front().point.dim();
  // Standardization is shared with with_hyperparameters; build a provisional
  // model to obtain the standardized targets.
  GPHyperparameters start;
  start.lengthscales = Eigen::VectorXd::Ones(d);
  start.noise_variance = options.jitter;
  GPModel provisional = with_hyperparameters(observations, start);
  const Eigen::MatrixXd& x = provisional.inputs_;
  const Eigen::VectorXd& y = provisional.standardized_;
  const auto diffs = squared_differences(x);

  Eigen::VectorXd lo(d + 1), hi(d + 1);
  lo.head(d).setConstant(std::log(options.min_lengthscale));
  hi.head(d).setConstant(std::log(options.max_lengthscale));
  lo[d] = std::log(options.min_signal_variance);
  hi[d] = std::log(options.max_signal_variance);
  const Eigen::VectorXd width = hi - lo;

  // Box constraints via theta = lo + width * sigmoid(u).
  const auto to_theta = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd theta(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) theta[i] = lo[i] + width[i] * sigmoid(u[i]);
    return theta;
  };
  const auto to_u = [&](const Eigen::VectorXd& theta) {
    Eigen::VectorXd u(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double p = std::clamp((theta[i] - lo[i]) / width[i], 1e-6, 1.0 - 1e-6);
      u[i] = std::log(p / (1.0 - p));
    }
    return u;
  };
  const DifferentiableObjective objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd& g) {
    const Eigen::VectorXd theta = to_theta(u);
    Eigen::VectorXd gt;
    const double lml = lml_from_differences(diffs, y, theta, options.jitter, &gt);
    if (!std::isfinite(lml)) return std::numeric_limits<double>::infinity();
    g.resize(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double s = sigmoid(u[i]);
      g[i] = -gt[i] * width[i] * s * (1.0 - s);
    }
    return -lml;
  };

  MinimizeOptions mopts;
  mopts.max_iterations = options.max_optimizer_iterations;
  mopts.gradient_tolerance = options.optimizer_gradient_tolerance;
  mopts.function_tolerance = options.optimizer_relative_tolerance;

  Eigen::VectorXd best_theta = Eigen::VectorXd::Zero(d + 1);
  double best_value = std::numeric_limits<double>::infinity();
  // A warm fit runs the previous optimum first, then the leading starts of
  // the cold sequence (unit lengthscales, then random draws).
  const int cold = warm_start != nullptr ? std::clamp(options.warm_extra_starts, 0, options.n_restarts)
                                         : std::max(1, options.n_restarts);
  const int restarts = cold + (warm_start != nullptr ? 1 : 0);
  for (int r = 0; r < restarts; ++r) {
    const int k = warm_start != nullptr ? r - 1 : r;
    Eigen::VectorXd theta0(d + 1);
    if (k < 0) {
      if (warm_start->lengthscales.size() != d) throw std::invalid_argument("warm start dimension mismatch");
      theta0.head(d) = warm_start->lengthscales.array().log();
      theta0[d] = std::log(warm_start->signal_variance);
    } else if (k == 0) {
      theta0.setZero();
    } else {
      for (Eigen::Index i = 0; i <= d; ++i) theta0[i] = rng.uniform(lo[i], hi[i]);
    }
    const MinimizeResult res = minimize_lbfgs(objective, to_u(theta0), mopts);
    if (std::isfinite(res.value) && res.value < best_value) {
      best_value = res.value;
      best_theta = to_theta(res.x);
    }
  }
  if (!std::isfinite(best_value)) throw NumericalError("GP hyperparameter fit failed");

  GPHyperparameters hyper;
  hyper.lengthscales = best_theta.head(d).array().exp();
  hyper.signal_variance = std::exp(best_theta[d]);
  hyper.noise_variance = options.jitter;
  return with_hyperparameters(std::move(observations), std::move(hyper));
}

GPModel GPModel::conditioned_on(const SearchPoint& point, double value) const {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite observation value");
  GPModel next = *this;
  next.observations_.push_back({point, value});
  const Eigen::Index n = inputs_.cols();
  next.inputs_.conservativeResize(Eigen::NoChange, n + 1);
  next.inputs_.col(n) = point.log_coords();
  next.standardized_.conservativeResize(n + 1);
  next.standardized_[n] = (value - offset_) / scale_;
  next.factorize();
  return next;
}

void GPModel::posterior_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mean,
                              Eigen::VectorXd& variance) const {
  const Eigen::MatrixXd kstar = cross_kernel(inputs_, points, hyper_.lengthscales, hyper_.signal_variance);
  mean = (kstar.transpose() * alpha_).array() * scale_ + offset_;
  const Eigen::MatrixXd v = chol_inverse_.triangularView<Eigen::Lower>() * kstar;
  variance = ((hyper_.signal_variance - v.colwise().squaredNorm().array()).cwiseMax(0.0) *
              (scale_ * scale_))
                 .matrix()
                 .transpose();
}

GPModel::Prediction GPModel::posterior(const SearchPoint& point) const {
  Eigen::VectorXd mean, variance;
  posterior_batch(point.log_coords(), mean, variance);
  return {mean[0], variance[0]};
}

double GPModel::best_value() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& o : observations_) best = std::max(best, o.value);
  return best;
}

double GPModel::log_marginal_likelihood() const {
  Eigen::VectorXd params(dim() + 1);
  params.head(dim()) = hyper_.lengthscales.array().log();
  params[dim()] = std::log(hyper_.signal_variance);
  return gp_log_marginal_likelihood(inputs_, standardized_, params, hyper_.noise_variance);
}

}  // namespace distinctbo
