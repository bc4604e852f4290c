#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "distinctbo/dates.h"
#include "distinctbo/market_data.h"

namespace distinctbo {

// Correlated geometric random walk:
//   log P_{t+1} = log P_t + drift - vol^2 / 2 + vol * (L z_t),  L L^T = correlation.
struct SyntheticMarketSpec {
  std::vector<std::string> assets;
  Eigen::VectorXd daily_drift;
  Eigen::VectorXd daily_vol;
  Eigen::MatrixXd correlation;
  std::size_t days = 260;
  Date start{std::chrono::year{2016}, std::chrono::January, std::chrono::day{4}};
  double initial_price = 100.0;
};

// Default sector labels used when none are supplied.
std::vector<std::string> default_asset_names(std::size_t count);

// Two asset groups (first `group_a` assets, then the rest) with positive
// within-group and negative cross-group correlation.
Eigen::MatrixXd two_group_correlation(std::size_t assets, std::size_t group_a, double within,
                                      double across);

// Throws ConfigError when the correlation matrix is not a symmetric PSD
// matrix with unit diagonal.
PriceSeries generate_market(const SyntheticMarketSpec& spec, std::uint64_t seed);

}  // namespace distinctbo
