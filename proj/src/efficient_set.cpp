#include "distinctbo/efficient_set.h"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "distinctbo/errors.h"
#include "distinctbo/rng.h"

namespace distinctbo {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

}  // namespace

CandidatePool::CandidatePool(Portfolio reference, std::vector<PoolEntry> entries)
    : reference_(std::move(reference)), entries_(std::move(entries)) {
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const PoolEntry& a, const PoolEntry& b) { return a.value > b.value; });
}

std::string to_string(InclusionRule rule) {
  return rule == InclusionRule::kAllPreceding ? "all-preceding" : "efficient-members";
}

InclusionRule inclusion_rule_from_string(const std::string& name) {
  if (name == "all-preceding") return InclusionRule::kAllPreceding;
  if (name == "efficient-members") return InclusionRule::kEfficientMembers;
  throw ConfigError("inclusion rule must be \"all-preceding\" or \"efficient-members\"");
}

EfficientSet alpha_distinct_set(const CandidatePool& pool, const PreferenceModel& model, double alpha,
                                InclusionRule rule) {
  if (pool.empty()) throw std::invalid_argument("empty candidate pool");
  check_alpha(alpha);
  const auto& e = pool.entries();
  const Portfolio& ref = pool.reference();
  EfficientSet set{alpha, {0}};
  for (std::size_t i = 1; i < e.size(); ++i) {
    bool admit = true;
    const auto beats = [&](std::size_t j) {
      return predict_more_distinct(model, ref, e[i].portfolio, ref, e[j].portfolio) > alpha;
    };
    if (rule == InclusionRule::kAllPreceding) {
      for (std::size_t j = 0; j < i && admit; ++j) admit = beats(j);
    } else {
      for (const std::size_t j : set.members) {
        if (!(admit = beats(j))) break;
      }
    }
    if (admit) set.members.push_back(i);
  }
  return set;
}

std::vector<double> inclusion_thresholds(const CandidatePool& pool, const PreferenceModel& model) {
  const auto& e = pool.entries();
  std::vector<double> out(e.size(), 1.0);
  for (std::size_t i = 1; i < e.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      out[i] = std::min(out[i], predict_more_distinct(model, pool.reference(), e[i].portfolio,
                                                      pool.reference(), e[j].portfolio));
    }
  }
  return out;
}

Portfolio blended_strategy(const Portfolio& x_opt, std::span<const Portfolio> efficient) {
  if (efficient.empty()) throw std::invalid_argument("blended strategy needs at least one portfolio");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(x_opt.size());
  for (const auto& p : efficient) {
    if (p.size() != x_opt.size()) throw std::invalid_argument("portfolio asset count mismatch");
    mean += p.weights();
  }
  mean /= static_cast<double>(efficient.size());
  return Portfolio(0.5 * (x_opt.weights() + mean));
}

std::vector<Portfolio> efficient_portfolios(const Portfolio& x_opt, const CandidatePool& pool,
                                            const std::optional<PreferenceModel>& model, double alpha,
                                            InclusionRule rule) {
  check_alpha(alpha);
  if (pool.empty() || !model) return {x_opt};
  std::vector<Portfolio> out;
  for (const std::size_t i : alpha_distinct_set(pool, *model, alpha, rule).members) {
    out.push_back(pool.entries()[i].portfolio);
  }
  return out;
}

const StrategyRow& StrategyReport::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.strategy == name) return r;
  }
  throw std::out_of_range("no strategy row " + name);
}

std::vector<const StrategyRow*> StrategyReport::random_rows() const {
  std::vector<const StrategyRow*> out;
  for (const auto& r : rows) {
    if (r.strategy.rfind("random_", 0) == 0) out.push_back(&r);
  }
  return out;
}

StrategyReport evaluate_strategies(const PriceSeries& series, std::span<const DateOutcome> outcomes,
                                   double alpha, const RandomBaseline& baseline, std::size_t horizon,
                                   InclusionRule rule) {
  check_alpha(alpha);
  std::vector<Date> dates;
  std::vector<Portfolio> opt_only, blended;
  std::vector<std::size_t> efficient_sizes;
  for (const auto& o : outcomes) {
    dates.push_back(o.trade_date);
    opt_only.push_back(o.x_opt);
    const auto eff = efficient_portfolios(o.x_opt, o.pool, o.model, alpha, rule);
    efficient_sizes.push_back(eff.size());
    blended.push_back(blended_strategy(o.x_opt, eff));
  }

  StrategyReport report{alpha, {}};
  const auto add_row = [&](std::string name, const std::vector<Portfolio>& strategy) {
    const RealizedStats s = realized_stats(series, dates, strategy, horizon);
    report.rows.push_back({std::move(name), s.mean, s.variance, s.per_date});
  };
  add_row("opt_only", opt_only);
  add_row("blended", blended);

  for (std::size_t r = 0; r < baseline.replicates; ++r) {
    std::vector<Portfolio> strategy;
    for (std::size_t d = 0; d < outcomes.size(); ++d) {
      const auto& o = outcomes[d];
      if (o.pool.empty()) {
        strategy.push_back(o.x_opt);
        continue;
      }
      const std::size_t n = o.pool.size();
      const std::size_t k = std::min(baseline.k == 0 ? efficient_sizes[d] : baseline.k, n);
      Rng rng(derive_seed(baseline.seed, "random-supplement", r * 1000003 + d));
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      std::vector<Portfolio> picks;
      for (std::size_t i = 0; i < k; ++i) {
        std::swap(idx[i], idx[i + rng.index(n - i)]);
        picks.push_back(o.pool.entries()[idx[i]].portfolio);
      }
      strategy.push_back(blended_strategy(o.x_opt, picks));
    }
    add_row("random_" + std::to_string(r + 1), strategy);
  }
  return report;
}

std::string report_csv(const StrategyReport& report) {
  std::string out = "strategy,mean,variance\n";
  char buf[128];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", r.mean, r.variance);
    out += r.strategy + buf;
  }
  return out;
}

}  // namespace distinctbo
