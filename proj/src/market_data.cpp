#include "distinctbo/market_data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "distinctbo/errors.h"

namespace distinctbo {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

struct ParsedRow {
  Date date;
  std::vector<double> prices;
  std::size_t line;
};

}  // namespace

PriceSeries load_price_series(std::string_view csv) {
  if (csv.size() >= 3 && csv.substr(0, 3) == "\xEF\xBB\xBF") csv.remove_prefix(3);

  PriceSeries series;
  std::vector<ParsedRow> rows;
  std::map<Date, std::size_t> seen;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t nl = csv.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv.size();
    const std::string_view line = trim(csv.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "date") {
        throw DataError("malformed header" + at_line(line_no) +
                            ": expected 'date,<asset1>,...' with at least two assets",
                        line_no);
      }
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].empty()) throw DataError("empty asset name" + at_line(line_no), line_no);
        series.assets.emplace_back(fields[i]);
      }
      have_header = true;
      continue;
    }

    if (fields.size() != series.assets.size() + 1) {
      throw DataError("malformed row" + at_line(line_no) + ": expected " +
                          std::to_string(series.assets.size() + 1) + " fields, found " +
                          std::to_string(fields.size()),
                      line_no);
    }
    ParsedRow row;
    row.line = line_no;
    try {
      row.date = parse_date(fields[0]);
    } catch (const std::invalid_argument&) {
      throw DataError("malformed date" + at_line(line_no), line_no);
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double value = 0.0;
      const auto f = fields[i];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), value);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(value)) {
        throw DataError("malformed row" + at_line(line_no) + ": non-numeric cell '" +
                            std::string(f) + "'",
                        line_no);
      }
      if (value <= 0.0) throw DataError("non-positive price" + at_line(line_no), line_no);
      row.prices.push_back(value);
    }
    if (const auto it = seen.find(row.date); it != seen.end()) {
      throw DataError("duplicate date " + format_date(row.date) + at_line(line_no) +
                          " (first seen at line " + std::to_string(it->second) + ")",
                      line_no);
    }
    seen.emplace(row.date, line_no);
    rows.push_back(std::move(row));
  }

  if (!have_header) throw DataError("empty price file");
  if (rows.size() < kMinPriceRows) {
    throw DataError("need at least " + std::to_string(kMinPriceRows) + " price rows, found " +
                    std::to_string(rows.size()));
  }

  std::sort(rows.begin(), rows.end(),
            [](const ParsedRow& a, const ParsedRow& b) { return a.date < b.date; });
  series.prices.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(series.assets.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    series.dates.push_back(rows[r].date);
    for (std::size_t a = 0; a < series.assets.size(); ++a) {
      series.prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = rows[r].prices[a];
    }
  }
  return series;
}

PriceSeries load_price_series_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open price file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_price_series(buf.str());
}

std::string format_price_csv(const PriceSeries& series) {
  std::string out = "date";
  for (const auto& a : series.assets) out += "," + a;
  out += "\n";
  char cell[64];
  for (std::size_t r = 0; r < series.num_dates(); ++r) {
    out += format_date(series.dates[r]);
    for (Eigen::Index a = 0; a < series.prices.cols(); ++a) {
      std::snprintf(cell, sizeof cell, ",%.10f", series.prices(static_cast<Eigen::Index>(r), a));
      out += cell;
    }
    out += "\n";
  }
  return out;
}

std::ptrdiff_t last_index_before(const PriceSeries& series, const Date& anchor) {
  const auto it = std::lower_bound(series.dates.begin(), series.dates.end(), anchor);
  return (it - series.dates.begin()) - 1;
}

ReturnWindow return_window(const PriceSeries& series, const Date& anchor, std::size_t lookback) {
  if (lookback == 0) throw std::invalid_argument("lookback must be positive");
  const std::ptrdiff_t last = last_index_before(series, anchor);
  const auto need = static_cast<std::ptrdiff_t>(lookback);
  if (last < need) {
    std::string hint = "series too short";
    if (series.dates.size() > lookback + 1) {
      hint = "earliest usable anchor is " + format_date(series.dates[lookback + 1]);
    }
    throw DataError("insufficient history for anchor " + format_date(anchor) + " with lookback " +
                    std::to_string(lookback) + ": " + hint);
  }
  ReturnWindow window;
  window.anchor = anchor;
  const Eigen::Index first = static_cast<Eigen::Index>(last - need);
  const Eigen::Index n = static_cast<Eigen::Index>(lookback);
  const auto& p = series.prices;
  window.returns = (p.middleRows(first + 1, n).array() / p.middleRows(first, n).array()) - 1.0;
  return window;
}

Eigen::VectorXd portfolio_returns(const ReturnWindow& window, const Portfolio& portfolio) {
  if (portfolio.size() != window.returns.cols()) {
    throw std::invalid_argument("portfolio asset count does not match return window");
  }
  return window.returns * portfolio.weights();
}

double sharpe_objective(const ReturnWindow& window, const Portfolio& portfolio,
                        const SharpeOptions& options) {
  const Eigen::VectorXd r = portfolio_returns(window, portfolio);
  const auto n = static_cast<double>(r.size());
  const double dof = n - options.ddof;
  if (dof <= 0.0) throw std::invalid_argument("return window too short for standard deviation");
  const double mean = r.mean();
  const double var = (r.array() - mean).square().sum() / dof;
  const double sd = std::sqrt(var);
  // Relative floor: a window of identical returns leaves only round-off.
  if (!(sd > 1e-14 * std::max(1.0, std::abs(mean)))) {
    if (mean == 0.0) return 0.0;
    return mean > 0.0 ? kLargeScore : -kLargeScore;
  }
  return mean / sd;
}

RealizedStats realized_stats(const PriceSeries& series, std::span<const Date> trade_dates,
                             std::span<const Portfolio> strategy_per_date, std::size_t horizon) {
  if (trade_dates.size() != strategy_per_date.size()) {
    throw std::invalid_argument("one strategy per trade date required");
  }
  if (trade_dates.size() < 2) throw std::invalid_argument("need >=2 trade dates");
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");

  RealizedStats stats;
  const auto& p = series.prices;
  for (std::size_t k = 0; k < trade_dates.size(); ++k) {
    const std::ptrdiff_t entry = last_index_before(series, trade_dates[k]);
    const std::ptrdiff_t exit = entry + static_cast<std::ptrdiff_t>(horizon);
    if (entry < 0 || exit >= static_cast<std::ptrdiff_t>(series.num_dates())) {
      throw DataError("missing forward data for trade date " + format_date(trade_dates[k]));
    }
    const Portfolio& x = strategy_per_date[k];
    if (x.size() != p.cols()) throw std::invalid_argument("portfolio asset count mismatch");
    const Eigen::VectorXd fwd =
        (p.row(exit).array() / p.row(entry).array() - 1.0).matrix().transpose();
    stats.per_date.push_back(x.weights().dot(fwd));
  }
  const auto n = static_cast<double>(stats.per_date.size());
  stats.mean = std::accumulate(stats.per_date.begin(), stats.per_date.end(), 0.0) / n;
  double ss = 0.0;
  for (const double r : stats.per_date) ss += (r - stats.mean) * (r - stats.mean);
  stats.variance = ss / (n - 1.0);
  return stats;
}

}  // namespace distinctbo
