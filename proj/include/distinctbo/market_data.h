#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "distinctbo/dates.h"
#include "distinctbo/portfolio.h"

namespace distinctbo {

inline constexpr std::size_t kMinPriceRows = 11;
inline constexpr std::size_t kDefaultLookback = 10;
// Sharpe score assigned to a zero-variance window with nonzero mean.
inline constexpr double kLargeScore = 1e6;

// Close prices, one row per trading date (strictly increasing), one column
// per asset. All cells strictly positive.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd prices;

  std::size_t num_dates() const { return dates.size(); }
  std::size_t num_assets() const { return assets.size(); }
};

// Parses `date,<asset1>,...,<assetA>` CSV text (LF or CRLF). Rows may appear
// in any order and are sorted by date. Throws DataError carrying the offending
// line for malformed rows, non-positive prices and duplicate dates.
PriceSeries load_price_series(std::string_view csv);
PriceSeries load_price_series_file(const std::filesystem::path& path);

// Inverse of load_price_series; prices printed with 10 decimals.
std::string format_price_csv(const PriceSeries& series);

struct ReturnWindow {
  Eigen::MatrixXd returns;  // lookback x assets, simple daily returns
  Date anchor;
};

// Simple returns over the `lookback` intervals ending at the last trading day
// strictly before `anchor`. Throws DataError naming the earliest usable anchor
// when history is insufficient.
ReturnWindow return_window(const PriceSeries& series, const Date& anchor,
                           std::size_t lookback = kDefaultLookback);

// Daily portfolio returns r_t = sum_a x_a * returns[t][a].
Eigen::VectorXd portfolio_returns(const ReturnWindow& window, const Portfolio& portfolio);

struct SharpeOptions {
  // Degrees of freedom subtracted in the standard deviation denominator.
  int ddof = 1;
};

// mean(r) / std(r), zero risk-free rate, no annualization. A zero-variance
// window scores 0 when the mean is 0 and sign(mean) * kLargeScore otherwise.
double sharpe_objective(const ReturnWindow& window, const Portfolio& portfolio,
                        const SharpeOptions& options = {});

struct RealizedStats {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> per_date;  // realized return per trade date
};

// For each trade date the position is entered at the close of the last
// trading day before the date and held for `horizon` trading days. Returns the
// sample mean and (n-1) variance of the per-date returns.
RealizedStats realized_stats(const PriceSeries& series, std::span<const Date> trade_dates,
                             std::span<const Portfolio> strategy_per_date,
                             std::size_t horizon = 1);

// Index of the last trading day strictly before `anchor`, or -1.
std::ptrdiff_t last_index_before(const PriceSeries& series, const Date& anchor);

}  // namespace distinctbo
