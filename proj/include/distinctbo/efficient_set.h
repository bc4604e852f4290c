#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distinctbo/dates.h"
#include "distinctbo/market_data.h"
#include "distinctbo/portfolio.h"
#include "distinctbo/preference.h"

namespace distinctbo {

struct PoolEntry {
  Portfolio portfolio;
  double value;
  std::size_t source_index;  // position in evaluation order
};

// Supplemental candidates sorted by value, nonincreasing; equal values keep
// evaluation order.
class CandidatePool {
 public:
  CandidatePool(Portfolio reference, std::vector<PoolEntry> entries);

  const Portfolio& reference() const { return reference_; }
  const std::vector<PoolEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  Portfolio reference_;
  std::vector<PoolEntry> entries_;
};

// kAllPreceding compares candidate i with every better-valued candidate;
// kEfficientMembers only with already admitted members. Only the former
// guarantees that sets shrink monotonically as alpha grows.
enum class InclusionRule { kAllPreceding, kEfficientMembers };

std::string to_string(InclusionRule rule);
InclusionRule inclusion_rule_from_string(const std::string& name);

struct EfficientSet {
  double alpha;
  std::vector<std::size_t> members;  // indices into CandidatePool::entries()
};

// Index 0 is always a member; candidate i joins when
// Pr(d(ref, x_i) > d(ref, x_j)) > alpha for each compared j < i.
// Throws std::invalid_argument on an empty pool or alpha outside (0, 1).
EfficientSet alpha_distinct_set(const CandidatePool& pool, const PreferenceModel& model, double alpha,
                                InclusionRule rule = InclusionRule::kAllPreceding);

// Under kAllPreceding, candidate i is a member exactly for alpha below
// threshold_i = min_{j<i} Pr(d(ref, x_i) > d(ref, x_j)); threshold_0 = 1.
std::vector<double> inclusion_thresholds(const CandidatePool& pool, const PreferenceModel& model);

// (x_opt + mean(efficient)) / 2. Throws std::invalid_argument when empty.
Portfolio blended_strategy(const Portfolio& x_opt, std::span<const Portfolio> efficient);

// Efficient portfolios of a pool, or {x_opt} when the pool is empty or no
// preference model exists yet.
std::vector<Portfolio> efficient_portfolios(const Portfolio& x_opt, const CandidatePool& pool,
                                            const std::optional<PreferenceModel>& model, double alpha,
                                            InclusionRule rule = InclusionRule::kAllPreceding);

// Outcome of one completed session, as needed for strategy evaluation.
struct DateOutcome {
  Date trade_date;
  Portfolio x_opt;
  CandidatePool pool;
  std::optional<PreferenceModel> model;
};

struct RandomBaseline {
  std::size_t k = 0;  // supplements per date; 0 matches the efficient set size
  std::size_t replicates = 20;
  std::uint64_t seed = 0;
};

struct StrategyRow {
  std::string strategy;
  double mean;
  double variance;
  std::vector<double> per_date;
};

struct StrategyReport {
  double alpha;
  std::vector<StrategyRow> rows;  // opt_only, blended, random_1 ... random_R

  const StrategyRow& row(const std::string& name) const;
  std::vector<const StrategyRow*> random_rows() const;
};

StrategyReport evaluate_strategies(const PriceSeries& series, std::span<const DateOutcome> outcomes,
                                   double alpha, const RandomBaseline& baseline,
                                   std::size_t horizon = 1,
                                   InclusionRule rule = InclusionRule::kAllPreceding);

// `strategy,mean,variance` rows.
std::string report_csv(const StrategyReport& report);

}  // namespace distinctbo
