#include "distinctbo/synthetic_market.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "distinctbo/errors.h"
#include "distinctbo/rng.h"

namespace distinctbo {

std::vector<std::string> default_asset_names(std::size_t count) {
  static const std::vector<std::string> sectors = {
      "industrials", "energy", "consumer_discretionary", "utilities", "telecom"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i < sectors.size() ? sectors[i] : "asset" + std::to_string(i + 1));
  }
  return out;
}

Eigen::MatrixXd two_group_correlation(std::size_t assets, std::size_t group_a, double within,
                                      double across) {
  const auto n = static_cast<Eigen::Index>(assets);
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool same = (i < static_cast<Eigen::Index>(group_a)) == (j < static_cast<Eigen::Index>(group_a));
      c(i, j) = i == j ? 1.0 : (same ? within : across);
    }
  }
  return c;
}

PriceSeries generate_market(const SyntheticMarketSpec& spec, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(spec.assets.size());
  if (n < 2) throw ConfigError("synthetic market needs at least two assets");
  if (spec.daily_drift.size() != n || spec.daily_vol.size() != n) {
    throw ConfigError("drift and volatility must have one entry per asset");
  }
  if (spec.correlation.rows() != n || spec.correlation.cols() != n) {
    throw ConfigError("correlation matrix must be assets x assets");
  }
  if (spec.days < kMinPriceRows) throw ConfigError("synthetic market needs at least 11 days");
  if ((spec.correlation - spec.correlation.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("correlation matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(spec.correlation(i, i) - 1.0) > 1e-12) {
      throw ConfigError("correlation matrix must have unit diagonal");
    }
    if (!(spec.daily_vol[i] >= 0.0)) throw ConfigError("volatility must be non-negative");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.correlation);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw ConfigError("correlation matrix is not positive semidefinite");
  }
  // Symmetric square root tolerates singular (PSD but not PD) inputs.
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();

  PriceSeries series;
  series.assets = spec.assets;
  series.dates = business_days(spec.start, spec.days);
  series.prices.resize(static_cast<Eigen::Index>(spec.days), n);
  Rng rng(derive_seed(seed, "synthetic-market"));
  Eigen::VectorXd log_p = Eigen::VectorXd::Constant(n, std::log(spec.initial_price));
  Eigen::VectorXd z(n);
  for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(spec.days); ++t) {
    if (t > 0) {
      for (Eigen::Index a = 0; a < n; ++a) z[a] = rng.normal();
      const Eigen::VectorXd shock = factor * z;
      for (Eigen::Index a = 0; a < n; ++a) {
        const double vol = spec.daily_vol[a];
        log_p[a] += spec.daily_drift[a] - 0.5 * vol * vol + vol * shock[a];
      }
    }
    series.prices.row(t) = log_p.array().exp().matrix().transpose();
  }
  return series;
}

}  // namespace distinctbo
