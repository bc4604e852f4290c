#include "distinctbo/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "distinctbo/errors.h"
#include "distinctbo/rng.h"

namespace distinctbo {

std::vector<Date> second_wednesdays(int year, const std::vector<unsigned>& months) {
  std::vector<Date> out;
  for (const unsigned m : months) {
    out.push_back(nth_weekday(std::chrono::year{year}, std::chrono::month{m}, std::chrono::Wednesday, 2));
  }
  return out;
}

ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  Json session_json = j;
  // The anchor comes from each trade date; a missing one must not fail
  // session validation.
  std::string data;
  if (j.contains("objective") && j["objective"].is_object()) {
    const auto& o = j["objective"];
    data = o.value("data", "");
    if (o.contains("lookback")) {
      if (!o["lookback"].is_number_integer()) throw ConfigError("objective.lookback: expected an integer");
      c.lookback = o["lookback"].get<std::size_t>();
    }
    if (!o.contains("anchor")) session_json.erase("objective");
  }
  if (j.contains("data")) {
    if (!j["data"].is_string()) throw ConfigError("data: expected a path string");
    data = j["data"].get<std::string>();
  }
  c.session = session_config_from_json(session_json);
  if (data.empty()) throw ConfigError("data: price file required");
  c.data_path = data;
  if (c.data_path.is_relative() && !base_dir.empty()) c.data_path = base_dir / c.data_path;

  if (const auto it = j.find("trade_dates"); it != j.end()) {
    if (it->is_array()) {
      for (const auto& d : *it) {
        if (!d.is_string()) throw ConfigError("trade_dates: expected date strings");
        try {
          c.trade_dates.push_back(parse_date(d.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("trade_dates: ") + e.what());
        }
      }
    } else if (it->is_object()) {
      const std::string schedule = it->value("schedule", "second-wednesday");
      if (schedule != "second-wednesday") throw ConfigError("trade_dates.schedule: unsupported");
      const int year = it->value("year", 2016);
      std::vector<unsigned> months = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
      if (it->contains("months")) months = (*it)["months"].get<std::vector<unsigned>>();
      for (const unsigned m : months) {
        if (m < 1 || m > 12) throw ConfigError("trade_dates.months: must be 1..12");
      }
      c.trade_dates = second_wednesdays(year, months);
    } else {
      throw ConfigError("trade_dates: expected an array or a schedule object");
    }
  } else if (j.contains("objective") && j["objective"].contains("anchor")) {
    c.trade_dates.push_back(c.session.objective->anchor);
  }
  if (c.trade_dates.empty()) throw ConfigError("trade_dates: at least one trade date required");
  std::sort(c.trade_dates.begin(), c.trade_dates.end());

  if (j.contains("horizon")) {
    if (!j["horizon"].is_number_integer() || j["horizon"].get<long long>() < 1) {
      throw ConfigError("horizon: expected a positive integer");
    }
    c.horizon = j["horizon"].get<std::size_t>();
  }
  if (const auto it = j.find("seeds"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("seeds: expected an array of integers");
    for (const auto& s : *it) {
      if (!s.is_number_integer()) throw ConfigError("seeds: expected an array of integers");
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (c.seeds.empty()) c.seeds.push_back(c.session.seed);
  if (const auto it = j.find("alphas"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("alphas: expected an array of numbers");
    for (const auto& a : *it) {
      if (!a.is_number() || !(a.get<double>() > 0.0 && a.get<double>() < 1.0)) {
        throw ConfigError("alphas: each alpha must lie in (0, 1)");
      }
      c.alphas.push_back(a.get<double>());
    }
  }
  if (const auto it = j.find("random_baseline"); it != j.end() && it->is_object()) {
    c.random.k = it->value("k", c.random.k);
    c.random.replicates = it->value("replicates", c.random.replicates);
    c.random.seed = it->value("seed", c.random.seed);
  }
  if (j.contains("out_dir")) {
    c.out_dir = j["out_dir"].get<std::string>();
    if (c.out_dir.is_relative() && !base_dir.empty()) c.out_dir = base_dir / c.out_dir;
  }
  c.emit_frontier = j.value("emit_frontier", c.emit_frontier);
  c.parallel = j.value("parallel", c.parallel);
  if (!c.session.oracle.simulated()) {
    throw ConfigError("oracle: deferred oracles need a human; run the session through `serve`");
  }
  return c;
}

Objective sharpe_objective_for(const PriceSeries& series, const Date& anchor, std::size_t lookback,
                               int ddof) {
  auto window = std::make_shared<const ReturnWindow>(return_window(series, anchor, lookback));
  const SharpeOptions options{ddof};
  return {series.assets, [window, options](const Portfolio& p) {
            return sharpe_objective(*window, p, options);
          }};
}

SessionConfig session_for_date(const ExperimentConfig& config, std::uint64_t seed, const Date& date) {
  SessionConfig s = config.session;
  const auto day = static_cast<std::uint64_t>(std::chrono::sys_days{date}.time_since_epoch().count());
  s.seed = derive_seed(seed, "session", day);
  s.oracle.seed = derive_seed(seed ^ config.session.oracle.seed, "oracle", day);
  s.objective = ObjectiveSpec{config.data_path.string(), date, config.lookback, 1};
  return s;
}

DateOutcome to_outcome(const Date& date, const SessionResult& result) {
  return {date, result.x_opt_portfolio, result.pool, result.model};
}

bool verify_nesting(const std::vector<AlphaSets>& sets) {
  for (std::size_t a = 1; a < sets.size(); ++a) {
    for (std::size_t d = 0; d < sets[a].members.size(); ++d) {
      const auto& low = sets[a - 1].members[d];
      for (const std::size_t m : sets[a].members[d]) {
        if (std::find(low.begin(), low.end(), m) == low.end()) return false;
      }
    }
  }
  return true;
}

std::vector<SeedOutcome> run_experiment(const ExperimentConfig& config, const PriceSeries& series) {
  const std::size_t n_dates = config.trade_dates.size();
  const std::size_t n_tasks = config.seeds.size() * n_dates;
  std::vector<std::optional<SessionResult>> results(n_tasks);
  std::vector<std::exception_ptr> errors(n_tasks);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      try {
        const std::uint64_t seed = config.seeds[t / n_dates];
        const Date& date = config.trade_dates[t % n_dates];
        const SessionConfig sc = session_for_date(config, seed, date);
        const Objective objective = sharpe_objective_for(series, date, config.lookback);
        results[t] = run_session(sc, objective, sc.oracle);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.parallel, n_tasks));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> alphas = config.alphas;
  if (alphas.empty()) alphas.push_back(config.session.alpha_default);
  std::sort(alphas.begin(), alphas.end());

  std::vector<SeedOutcome> out;
  for (std::size_t s = 0; s < config.seeds.size(); ++s) {
    SeedOutcome o{config.seeds[s], config.trade_dates, {}, {}, true, std::nullopt};
    std::vector<DateOutcome> outcomes;
    for (std::size_t d = 0; d < n_dates; ++d) {
      o.results.push_back(std::move(*results[s * n_dates + d]));
      outcomes.push_back(to_outcome(config.trade_dates[d], o.results.back()));
    }
    for (const double a : alphas) {
      AlphaSets sets{a, {}};
      for (const auto& r : o.results) sets.members.push_back(r.with_alpha(a).members);
      o.alpha_sets.push_back(std::move(sets));
    }
    o.nesting_verified = verify_nesting(o.alpha_sets);
    if (n_dates >= 2) {
      RandomBaseline rb = config.random;
      rb.seed = derive_seed(config.seeds[s] ^ config.random.seed, "random-baseline");
      o.report = evaluate_strategies(series, outcomes, config.session.alpha_default, rb, config.horizon,
                                     config.session.inclusion_rule);
    }
    out.push_back(std::move(o));
  }
  return out;
}

Json to_json(const SeedOutcome& outcome, const ExperimentConfig& config) {
  Json sessions = Json::array();
  for (std::size_t d = 0; d < outcome.dates.size(); ++d) {
    sessions.push_back({{"trade_date", format_date(outcome.dates[d])}, {"result", to_json(outcome.results[d])}});
  }
  Json sets = Json::array();
  for (const auto& s : outcome.alpha_sets) sets.push_back({{"alpha", s.alpha}, {"members", s.members}});
  return Json{{"seed", outcome.seed},
              {"data", config.data_path.string()},
              {"lookback", config.lookback},
              {"horizon", config.horizon},
              {"alpha", config.session.alpha_default},
              {"inclusion_rule", to_string(config.session.inclusion_rule)},
              {"random_baseline",
               {{"k", config.random.k},
                {"replicates", config.random.replicates},
                {"seed", derive_seed(outcome.seed ^ config.random.seed, "random-baseline")}}},
              {"sessions", sessions},
              {"alpha_sets", sets},
              {"nesting_verified", outcome.nesting_verified},
              {"report", outcome.report ? to_json(*outcome.report) : Json(nullptr)}};
}

std::vector<DateOutcome> outcomes_from_json(const Json& seed_result) {
  std::vector<DateOutcome> out;
  for (const auto& s : seed_result.at("sessions")) {
    const Date date = parse_date(s.at("trade_date").get<std::string>());
    const auto& r = s.at("result");
    const Portfolio x_opt = portfolio_from_json(r.at("x_opt").at("portfolio"));
    std::vector<PoolEntry> entries;
    for (const auto& e : r.at("pool")) {
      entries.push_back({portfolio_from_json(e.at("portfolio")), e.at("value").get<double>(),
                         e.at("evaluation").get<std::size_t>()});
    }
    std::sort(entries.begin(), entries.end(),
              [](const PoolEntry& a, const PoolEntry& b) { return a.source_index < b.source_index; });
    std::optional<PreferenceModel> model;
    if (!r.at("preference_model").is_null()) model = preference_model_from_json(r["preference_model"]);
    out.push_back({date, x_opt, CandidatePool(x_opt, std::move(entries)), model});
  }
  return out;
}

std::string frontier_csv(const SeedOutcome& outcome) {
  std::string out = "trade_date,rank,evaluation,value,threshold\n";
  char buf[160];
  for (std::size_t d = 0; d < outcome.results.size(); ++d) {
    const auto& r = outcome.results[d];
    if (r.pool.empty() || !r.model) continue;
    const auto thresholds = inclusion_thresholds(r.pool, *r.model);
    for (std::size_t i = 0; i < r.pool.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%zu,%zu,%.17g,%.17g\n", i, r.pool.entries()[i].source_index,
                    r.pool.entries()[i].value, thresholds[i]);
      out += format_date(outcome.dates[d]) + buf;
    }
  }
  return out;
}

std::string summary_csv(const std::vector<SeedOutcome>& outcomes) {
  std::string out =
      "seed,opt_only_mean,opt_only_variance,blended_mean,blended_variance,random_mean_avg,random_mean_std,"
      "random_variance_avg\n";
  char buf[512];
  for (const auto& o : outcomes) {
    if (!o.report) continue;
    const auto& opt = o.report->row("opt_only");
    const auto& bl = o.report->row("blended");
    const auto rnd = o.report->random_rows();
    double mean_avg = 0.0, var_avg = 0.0, mean_sd = 0.0;
    for (const auto* r : rnd) {
      mean_avg += r->mean;
      var_avg += r->variance;
    }
    if (!rnd.empty()) {
      mean_avg /= static_cast<double>(rnd.size());
      var_avg /= static_cast<double>(rnd.size());
      for (const auto* r : rnd) mean_sd += (r->mean - mean_avg) * (r->mean - mean_avg);
      mean_sd = rnd.size() > 1 ? std::sqrt(mean_sd / static_cast<double>(rnd.size() - 1)) : 0.0;
    }
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(o.seed), opt.mean, opt.variance, bl.mean, bl.variance,
                  mean_avg, mean_sd, var_avg);
    out += buf;
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

std::vector<std::filesystem::path> write_experiment_outputs(const ExperimentConfig& config,
                                                            const std::vector<SeedOutcome>& outcomes) {
  std::filesystem::create_directories(config.out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& o : outcomes) {
    const std::string tag = "seed" + std::to_string(o.seed);
    const auto result_path = config.out_dir / ("result_" + tag + ".json");
    write_file(result_path, to_json(o, config).dump(2) + "\n");
    written.push_back(result_path);
    if (o.report) {
      const auto report_path = config.out_dir / ("report_" + tag + ".csv");
      write_file(report_path, report_csv(*o.report));
      written.push_back(report_path);
    }
    if (config.emit_frontier) {
      const auto frontier_path = config.out_dir / ("frontier_" + tag + ".csv");
      write_file(frontier_path, frontier_csv(o));
      written.push_back(frontier_path);
    }
  }
  const auto summary_path = config.out_dir / "summary.csv";
  write_file(summary_path, summary_csv(outcomes));
  written.push_back(summary_path);
  return written;
}

SyntheticMarketSpec two_group_market_spec(std::size_t days) {
  SyntheticMarketSpec spec;
  spec.assets = default_asset_names(5);
  spec.daily_drift = (Eigen::VectorXd(5) << 4e-4, 2e-4, 3e-4, 3e-4, 4e-4).finished();
  spec.daily_vol = (Eigen::VectorXd(5) << 0.012, 0.018, 0.014, 0.008, 0.010).finished();
  spec.correlation = two_group_correlation(5, 3, 0.6, -0.5);
  spec.days = days;
  return spec;
}

}  // namespace distinctbo
