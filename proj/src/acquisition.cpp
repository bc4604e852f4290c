#include "distinctbo/acquisition.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <stdexcept>

namespace distinctbo {

namespace {

constexpr double kIneligible = -std::numeric_limits<double>::infinity();

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

bool is_excluded(const Eigen::VectorXd& p, std::span<const SearchPoint> exclude, double sep) {
  for (const auto& e : exclude) {
    if ((p - e.log_coords()).lpNorm<Eigen::Infinity>() < sep) return true;
  }
  return false;
}

unsigned nth_prime(Eigen::Index k) {
  static const unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (k >= static_cast<Eigen::Index>(std::size(primes))) throw std::invalid_argument("Halton dimension too large");
  return primes[k];
}

double radical_inverse(std::size_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

struct Scorer {
  const GPModel& model;
  std::span<const SearchPoint> exclude;
  double best;
  double separation;
  std::size_t evaluations = 0;

  Eigen::VectorXd operator()(const Eigen::MatrixXd& points) {
    Eigen::VectorXd mean, var;
    model.posterior_batch(points, mean, var);
    Eigen::VectorXd ei(points.cols());
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
      ei[i] = is_excluded(points.col(i), exclude, separation)
                  ? kIneligible
                  : expected_improvement(mean[i], var[i], best);
    }
    evaluations += static_cast<std::size_t>(points.cols());
    return ei;
  }
};

}  // namespace

double expected_improvement(double mean, double variance, double best) {
  const double sigma = std::sqrt(std::max(variance, 0.0));
  if (sigma < 1e-12) return std::max(mean - best, 0.0);
  const double z = (mean - best) / sigma;
  return std::max(sigma * (z * normal_cdf(z) + normal_pdf(z)), 0.0);
}

double expected_improvement(const GPModel& model, const SearchPoint& point, double best) {
  const auto pred = model.posterior(point);
  return expected_improvement(pred.mean, pred.variance, best);
}

Eigen::MatrixXd shifted_halton(std::size_t n, Eigen::Index dim, Rng& rng) {
  Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double shift = rng.uniform();
    const unsigned base = nth_prime(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = radical_inverse(i + 1, base) + shift;
      out(k, static_cast<Eigen::Index>(i)) = v - std::floor(v);
    }
  }
  return out;
}

std::vector<SearchPoint> latin_hypercube(std::size_t n, Eigen::Index dim, Rng& rng) {
  Eigen::MatrixXd unit(dim, static_cast<Eigen::Index>(n));
  std::vector<std::size_t> perm(n);
  for (Eigen::Index k = 0; k < dim; ++k) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
    for (std::size_t i = 0; i < n; ++i) {
      unit(k, static_cast<Eigen::Index>(i)) =
          (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
    }
  }
  std::vector<SearchPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd p = (kLogLower + (kLogUpper - kLogLower) * unit.col(static_cast<Eigen::Index>(i)).array()).matrix();
    out.push_back(SearchPoint::from_log(std::move(p)));
  }
  return out;
}

AcquisitionResult maximize_acquisition(const GPModel& model, std::span<const SearchPoint> exclude,
                                       Rng& rng, const AcquisitionOptions& options) {
  const Eigen::Index dim = model.dim();
  Scorer score{model, exclude, model.best_value(), options.min_separation};

  const Eigen::MatrixXd candidates =
      (kLogLower + (kLogUpper - kLogLower) * shifted_halton(options.n_candidates, dim, rng).array()).matrix();
  const Eigen::VectorXd ei = score(candidates);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(candidates.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ei[a] > ei[b]; });
  if (order.empty() || ei[order.front()] == kIneligible) {
    throw std::runtime_error("all acquisition candidates are excluded");
  }

  Eigen::VectorXd best_point = candidates.col(order.front());
  double best_ei = ei[order.front()];

  const std::size_t starts = std::min(options.n_polish_starts, order.size());
  Eigen::MatrixXd neighbours(dim, 2 * dim);
  for (std::size_t s = 0; s < starts; ++s) {
    const Eigen::Index c = order[s];
    if (ei[c] == kIneligible) break;
    Eigen::VectorXd x = candidates.col(c);
    double fx = ei[c];
    double step = options.initial_step;
    for (int iter = 0; iter < options.polish_iterations && step >= options.min_step; ++iter) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        neighbours.col(2 * k) = x;
        neighbours(k, 2 * k) = std::min(x[k] + step, kLogUpper);
        neighbours.col(2 * k + 1) = x;
        neighbours(k, 2 * k + 1) = std::max(x[k] - step, kLogLower);
      }
      const Eigen::VectorXd vals = score(neighbours);
      Eigen::Index arg = 0;
      const double top = vals.maxCoeff(&arg);
      if (top > fx) {
        x = neighbours.col(arg);
        fx = top;
      } else {
        step *= 0.5;
      }
    }
    if (fx > best_ei) {
      best_ei = fx;
      best_point = x;
    }
  }
  return {SearchPoint::from_log(best_point), best_ei, score.evaluations};
}

std::vector<SearchPoint> constant_liar_batch(const GPModel& model, std::size_t m,
                                             std::span<const SearchPoint> exclude, Rng& rng,
                                             const AcquisitionOptions& options) {
  if (m == 0) throw std::invalid_argument("batch size must be positive");
  const double lie = model.best_value();
  std::vector<SearchPoint> excluded(exclude.begin(), exclude.end());
  std::vector<SearchPoint> batch;
  batch.reserve(m);
  GPModel current = model;
  for (std::size_t k = 0; k < m; ++k) {
    const AcquisitionResult res = maximize_acquisition(current, excluded, rng, options);
    batch.push_back(res.point);
    excluded.push_back(res.point);
    if (k + 1 < m) current = current.conditioned_on(res.point, lie);
  }
  return batch;
}

}  // namespace distinctbo
