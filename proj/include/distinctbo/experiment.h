#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "distinctbo/efficient_set.h"
#include "distinctbo/market_data.h"
#include "distinctbo/orchestrator.h"
#include "distinctbo/serialization.h"
#include "distinctbo/synthetic_market.h"

namespace distinctbo {

// A session config plus the schedule of trade dates it is repeated over.
// Shares its JSON schema with the service: experiment keys sit beside the
// session keys.
struct ExperimentConfig {
  SessionConfig session;
  std::filesystem::path data_path;
  std::vector<Date> trade_dates;
  std::size_t lookback = kDefaultLookback;
  std::size_t horizon = 1;
  std::vector<std::uint64_t> seeds;
  std::vector<double> alphas;
  RandomBaseline random;
  std::filesystem::path out_dir = "out";
  bool emit_frontier = false;
  std::size_t parallel = 1;
};

// Second Wednesday of each listed month.
std::vector<Date> second_wednesdays(int year, const std::vector<unsigned>& months);

// Relative paths resolve against `base_dir`. Throws ConfigError.
ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});

// Sharpe objective for `anchor` on an already loaded series.
Objective sharpe_objective_for(const PriceSeries& series, const Date& anchor, std::size_t lookback,
                               int ddof = 1);

// Per trade date session settings derived from the experiment seed.
SessionConfig session_for_date(const ExperimentConfig& config, std::uint64_t seed, const Date& date);

DateOutcome to_outcome(const Date& date, const SessionResult& result);

struct AlphaSets {
  double alpha;
  std::vector<std::vector<std::size_t>> members;  // per trade date
};

struct SeedOutcome {
  std::uint64_t seed;
  std::vector<Date> dates;
  std::vector<SessionResult> results;
  std::vector<AlphaSets> alpha_sets;  // ascending alpha
  bool nesting_verified = true;
  std::optional<StrategyReport> report;  // needs at least two trade dates
};

// True when members at every higher alpha are a subset of those at lower.
bool verify_nesting(const std::vector<AlphaSets>& sets);

// Runs every (seed, date) session with up to config.parallel threads.
std::vector<SeedOutcome> run_experiment(const ExperimentConfig& config, const PriceSeries& series);

Json to_json(const SeedOutcome& outcome, const ExperimentConfig& config);
// Pool, x_opt and model of each date from a seed result document.
std::vector<DateOutcome> outcomes_from_json(const Json& seed_result);

// Frontier dump: trade_date,rank,evaluation,value,threshold.
std::string frontier_csv(const SeedOutcome& outcome);
// One line per seed with opt_only, blended and random-baseline statistics.
std::string summary_csv(const std::vector<SeedOutcome>& outcomes);

// Writes result_seed<s>.json, report_seed<s>.csv, frontier_seed<s>.csv and
// summary.csv under config.out_dir; returns the written paths.
std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentConfig& config,
                                                            const std::vector<SeedOutcome>& outcomes);

// Synthetic market used by the bundled experiment: industrials, energy and
// consumer discretionary move together, utilities and telecom against them.
SyntheticMarketSpec two_group_market_spec(std::size_t days = 260);

}  // namespace distinctbo
