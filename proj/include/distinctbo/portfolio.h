#pragma once

#include <Eigen/Core>

namespace distinctbo {

// Bounds of the search box in base-10 log coordinates: raw ratios lie in
// [1e-3, 1e3].
inline constexpr double kLogLower = -3.0;
inline constexpr double kLogUpper = 3.0;

// A point of the box the optimizer searches. Stored on the log scale; the raw
// coordinates are the asset-to-last-asset weight ratios.
class SearchPoint {
 public:
  // Coordinates outside the box by more than 1e-9 throw std::invalid_argument;
  // smaller excursions are clamped.
  static SearchPoint from_log(Eigen::VectorXd log_coords);
  static SearchPoint from_raw(const Eigen::VectorXd& coords);

  const Eigen::VectorXd& log_coords() const { return log_coords_; }
  Eigen::VectorXd coords() const;
  Eigen::Index dim() const { return log_coords_.size(); }

  friend bool operator==(const SearchPoint& a, const SearchPoint& b) {
    return a.log_coords_ == b.log_coords_;
  }

 private:
  explicit SearchPoint(Eigen::VectorXd log_coords) : log_coords_(std::move(log_coords)) {}
  Eigen::VectorXd log_coords_;
};

// Long-only fully invested weights: all strictly positive, summing to one.
class Portfolio {
 public:
  static constexpr double kSumTolerance = 1e-12;

  // Throws std::invalid_argument when the invariants do not hold.
  explicit Portfolio(Eigen::VectorXd weights);
  static Portfolio uniform(Eigen::Index assets);

  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }

  friend bool operator==(const Portfolio& a, const Portfolio& b) {
    return a.weights_ == b.weights_;
  }

 private:
  Eigen::VectorXd weights_;
};

// weights = (r_1, ..., r_{A-1}, 1) / (1 + sum r), r the raw coordinates.
Portfolio to_simplex(const SearchPoint& point);

// Inverse of to_simplex: r_i = w_i / w_A. Throws std::domain_error
// "portfolio not representable in search box" when a ratio leaves the box.
SearchPoint from_simplex(const Portfolio& portfolio);

}  // namespace distinctbo
