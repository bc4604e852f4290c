#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "distinctbo/portfolio.h"
#include "distinctbo/rng.h"

namespace distinctbo {

struct Observation {
  SearchPoint point;
  double value;
};

// Kernel hyperparameters. Lengthscales are in log10-coordinate units; the
// variances refer to standardized targets (zero mean, unit variance).
struct GPHyperparameters {
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;
  double noise_variance = 1e-8;
};

struct GPOptions {
  int n_restarts = 8;
  double jitter = 1e-8;
  double min_lengthscale = 1e-2;
  double max_lengthscale = 1e2;
  double min_signal_variance = 1e-4;
  double max_signal_variance = 1e4;
  int max_optimizer_iterations = 100;
  double optimizer_gradient_tolerance = 1e-4;
  double optimizer_relative_tolerance = 1e-7;
  // Evaluations between full multi-start fits; in between a session refines
  // the previous optimum with a single local run. 1 refits fully every time.
  std::size_t refit_period = 10;
  // Cold starts added to the warm start between full fits.
  int warm_extra_starts = 1;
  // Minimum L-infinity separation between training inputs (log space).
  double duplicate_tolerance = 1e-9;
};

// Matérn 5/2 correlation at scaled distance r: (1 + sqrt5 r + 5r^2/3) exp(-sqrt5 r).
double matern52(double r);

// Log marginal likelihood of standardized targets `y` at inputs `x` (dim x n)
// for params = (log l_1, ..., log l_d, log signal_variance). Fills `grad`
// with the derivative with respect to params when non-null. Returns -inf when
// the kernel matrix cannot be factorized.
double gp_log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& log_params, double noise_variance,
                                  Eigen::VectorXd* grad = nullptr);

// Gaussian-process regression with a Matérn 5/2 ARD kernel and a constant
// mean equal to the sample mean of the targets.
class GPModel {
 public:
  struct Prediction {
    double mean;
    double variance;
  };

  // Fits hyperparameters by maximizing the marginal likelihood from
  // `options.n_restarts` starting points (the first at unit lengthscales, the
  // rest drawn from `rng`). With `warm_start` the runs are that point plus
  // the first `options.warm_extra_starts` starts of the cold sequence. Throws
  // std::invalid_argument on fewer than two observations, duplicate inputs or
  // non-finite targets.
  static GPModel fit(std::vector<Observation> observations, const GPOptions& options, Rng& rng,
                     const GPHyperparameters* warm_start = nullptr);

  // Exact GP conditioning at fixed hyperparameters. The noise variance is
  // raised by factors of 10 (up to 1e-4) if the kernel matrix is numerically
  // singular.
  static GPModel with_hyperparameters(std::vector<Observation> observations,
                                      GPHyperparameters hyperparameters);

  // Adds one observation keeping hyperparameters and target standardization.
  // Used for constant-liar fantasies.
  GPModel conditioned_on(const SearchPoint& point, double value) const;

  Prediction posterior(const SearchPoint& point) const;
  // points: dim x N, log coordinates.
  void posterior_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mean,
                       Eigen::VectorXd& variance) const;

  double prior_variance() const { return scale_ * scale_ * hyper_.signal_variance; }
  double best_value() const;
  double log_marginal_likelihood() const;

  const std::vector<Observation>& observations() const { return observations_; }
  const GPHyperparameters& hyperparameters() const { return hyper_; }
  double target_mean() const { return offset_; }
  double target_scale() const { return scale_; }
  Eigen::Index dim() const { return inputs_.rows(); }

 private:
  GPModel() = default;
  void factorize();

  std::vector<Observation> observations_;
  Eigen::MatrixXd inputs_;  // dim x n
  Eigen::VectorXd standardized_;
  double offset_ = 0.0;
  double scale_ = 1.0;
  GPHyperparameters hyper_;
  Eigen::MatrixXd chol_inverse_;  // L^-1 for K + noise I = L L^T
  Eigen::VectorXd alpha_;
};

}  // namespace distinctbo
