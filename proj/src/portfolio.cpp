#include "distinctbo/portfolio.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace distinctbo {

namespace {

constexpr double kBoxSlack = 1e-9;

}  // namespace

SearchPoint SearchPoint::from_log(Eigen::VectorXd log_coords) {
  if (log_coords.size() == 0) throw std::invalid_argument("empty search point");
  for (Eigen::Index i = 0; i < log_coords.size(); ++i) {
    const double v = log_coords[i];
    if (!std::isfinite(v) || v < kLogLower - kBoxSlack || v > kLogUpper + kBoxSlack) {
      throw std::invalid_argument("search coordinate outside [-3, 3] (log scale)");
    }
    log_coords[i] = std::clamp(v, kLogLower, kLogUpper);
  }
  return SearchPoint(std::move(log_coords));
}

SearchPoint SearchPoint::from_raw(const Eigen::VectorXd& coords) {
  Eigen::VectorXd logs(coords.size());
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    if (!(coords[i] > 0.0)) throw std::invalid_argument("raw search coordinate must be positive");
    logs[i] = std::log10(coords[i]);
  }
  return from_log(std::move(logs));
}

Eigen::VectorXd SearchPoint::coords() const {
  Eigen::VectorXd raw(log_coords_.size());
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw[i] = std::pow(10.0, log_coords_[i]);
  return raw;
}

Portfolio::Portfolio(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (weights_.size() < 2) throw std::invalid_argument("portfolio needs at least two assets");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw std::invalid_argument("portfolio weights must be strictly positive");
    }
  }
  if (std::abs(weights_.sum() - 1.0) > kSumTolerance) {
    throw std::invalid_argument("portfolio weights must sum to 1");
  }
}

Portfolio Portfolio::uniform(Eigen::Index assets) {
  return Portfolio(Eigen::VectorXd::Constant(assets, 1.0 / static_cast<double>(assets)));
}

Portfolio to_simplex(const SearchPoint& point) {
  const Eigen::VectorXd raw = point.coords();
  const double denom = 1.0 + raw.sum();
  Eigen::VectorXd w(raw.size() + 1);
  w.head(raw.size()) = raw / denom;
  w[raw.size()] = 1.0 / denom;
  return Portfolio(std::move(w));
}

SearchPoint from_simplex(const Portfolio& portfolio) {
  const Eigen::Index dim = portfolio.size() - 1;
  const double last = portfolio[dim];
  Eigen::VectorXd logs(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double v = std::log10(portfolio[i] / last);
    if (!std::isfinite(v) || v < kLogLower - kBoxSlack || v > kLogUpper + kBoxSlack) {
      throw std::domain_error("portfolio not representable in search box");
    }
    logs[i] = v;
  }
  return SearchPoint::from_log(std::move(logs));
}

}  // namespace distinctbo
