// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "distinctbo/acquisition.h"
#include "distinctbo/efficient_set.h"
#include "distinctbo/experiment.h"
#include "distinctbo/gp.h"
#include "distinctbo/oracle.h"
#include "distinctbo/orchestrator.h"
#include "distinctbo/portfolio.h"
#include "distinctbo/preference.h"
#include "distinctbo/serialization.h"
#include "distinctbo/service.h"

using namespace distinctbo;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double sample_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Portfolio random_portfolio(Rng& rng, Eigen::Index assets = 5) {
  Eigen::VectorXd l(assets - 1);
  for (Eigen::Index i = 0; i < l.size(); ++i) l[i] = rng.uniform(-1.0, 1.0);
  return to_simplex(SearchPoint::from_log(l));
}

const PriceSeries& sector_market() {
  static const PriceSeries s = generate_market(two_group_market_spec(), 20161);
  return s;
}

Outcome simplex_correctness() {
  Rng rng(1);
  int failures = 0;
  double worst_sum = 0.0, worst_trip = 0.0;
  for (int t = 0; t < 10000; ++t) {
    Eigen::VectorXd l(4);
    for (Eigen::Index i = 0; i < 4; ++i) l[i] = rng.uniform(kLogLower, kLogUpper);
    const SearchPoint p = SearchPoint::from_log(l);
    const Portfolio w = to_simplex(p);
    const double sum_err = std::abs(w.weights().sum() - 1.0);
    const double trip = (from_simplex(w).log_coords() - l).cwiseAbs().maxCoeff();
    worst_sum = std::max(worst_sum, sum_err);
    worst_trip = std::max(worst_trip, trip);
    if (sum_err > 1e-12 || !(w.weights().array() > 0.0).all() || trip > 1e-10) ++failures;
  }
  return {failures == 0, "10000 points, max |sum-1| " + fmt("%.1e", worst_sum) + ", max round-trip " +
                             fmt("%.1e", worst_trip)};
}

Outcome gp_sanity() {
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    Rng rng(derive_seed(100, "gp-instance", inst));
    const auto dim = static_cast<Eigen::Index>(1 + rng.index(4));
    const std::size_t n = 5 + rng.index(40);
    Eigen::VectorXd freq(dim);
    for (Eigen::Index k = 0; k < dim; ++k) freq[k] = rng.uniform(0.2, 2.0);
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd x(dim);
      for (Eigen::Index k = 0; k < dim; ++k) x[k] = rng.uniform(kLogLower, kLogUpper);
      obs.push_back({SearchPoint::from_log(x), std::sin(freq.dot(x)) + 0.1 * x.squaredNorm()});
    }
    const GPModel gp = GPModel::fit(obs, GPOptions{}, rng);
    for (const auto& o : obs) worst = std::max(worst, std::abs(gp.posterior(o.point).mean - o.value));
  }
  Rng rng(2);
  int negative = 0;
  for (int t = 0; t < 100000; ++t) {
    const double sd = rng.uniform(0.0, 3.0);
    if (expected_improvement(rng.uniform(-5, 5), sd * sd, rng.uniform(-5, 5)) < 0.0) ++negative;
  }
  const int draws = 1000000;
  double mc = 0.0;
  for (int i = 0; i < draws; ++i) mc += std::max(rng.normal(), 0.0);
  mc /= draws;
  const double ei = expected_improvement(0.7, 1.0, 0.7);
  const bool pass = worst <= 1e-6 && negative == 0 && std::abs(ei - 0.398942) <= 1e-3 && std::abs(ei - mc) <= 1e-3;
  return {pass, "max training residual " + fmt("%.1e", worst) + ", negative EI " + std::to_string(negative) +
                    ", EI(best,1) " + fmt("%.6f", ei) + " vs Monte Carlo " + fmt("%.6f", mc)};
}

Outcome bo_effectiveness() {
  // Separable in the log ratios, one bump per coordinate.
  const Eigen::Vector4d centers(1.1, -0.7, 0.4, -1.9);
  const Eigen::Vector4d widths(0.9, 1.2, 0.7, 1.0);
  const auto g = [&](Eigen::Index k, double u) {
    const double d = (u - centers[k]) / widths[k];
    return std::exp(-0.5 * d * d);
  };
  double optimum = 0.0;
  for (Eigen::Index k = 0; k < 4; ++k) {
    double best = 0.0;
    for (int i = 0; i < 10000; ++i) best = std::max(best, g(k, kLogLower + (kLogUpper - kLogLower) * i / 9999.0));
    optimum += best;
  }
  const Objective objective{default_asset_names(5), [g](const Portfolio& p) {
                              double v = 0.0;
                              for (Eigen::Index k = 0; k < 4; ++k) v += g(k, std::log10(p[k] / p[4]));
                              return v;
                            }};
  int hits = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SessionConfig c;
    c.seed = seed;
    c.n_phase2 = 0;
    Session s(c, objective);
    s.start();
    while (s.phase() == Phase::kPhase1) s.step_phase1();
    if (s.state().observations.size() != 60) return {false, "phase 1 made the wrong number of evaluations"};
    const double ratio = s.result().x_opt_value / optimum;
    worst = std::min(worst, ratio);
    hits += ratio >= 0.98 ? 1 : 0;
  }
  return {hits >= 9, std::to_string(hits) + "/10 seeds reach 98% of the grid optimum (worst " +
                         fmt("%.4f", worst) + ")"};
}

double recovery_accuracy(std::uint64_t seed, double noise_fraction, std::size_t& samples_seen, bool& per_ranking_ok) {
  Rng rng(seed);
  const Portfolio ref = random_portfolio(rng);
  const auto truth = DistinctnessOracle::euclidean();
  std::vector<double> distances;
  for (int i = 0; i < 1000; ++i) distances.push_back(oracle_distance(truth, ref, random_portfolio(rng)));
  std::nth_element(distances.begin(), distances.begin() + 500, distances.end());
  const double median = distances[500];
  const DistinctnessOracle oracle = noise_fraction > 0.0
                                        ? DistinctnessOracle::noisy_weighted(Eigen::VectorXd::Ones(5),
                                                                             noise_fraction * median, seed)
                                        : truth;
  std::vector<PairwiseSample> samples;
  per_ranking_ok = true;
  for (int r = 0; r < 60; ++r) {
    RankingQuery q{"q-" + std::to_string(r + 1), ref, {}};
    for (int i = 0; i < 5; ++i) q.candidates.push_back(random_portfolio(rng));
    const auto answer = std::get<RankingResponse>(answer_ranking(oracle, q));
    const auto pairs = ranking_to_pairs(ref, ranked_candidates(q, answer.order));
    per_ranking_ok = per_ranking_ok && pairs.size() == 20;
    samples.insert(samples.end(), pairs.begin(), pairs.end());
  }
  samples_seen = samples.size();
  const PreferenceModel model = fit_preference(samples);
  std::size_t correct = 0;
  for (int i = 0; i < 1000; ++i) {
    const Portfolio a = random_portfolio(rng), b = random_portfolio(rng);
    const bool label = oracle_distance(truth, ref, a) > oracle_distance(truth, ref, b);
    correct += (predict_more_distinct(model, ref, a, ref, b) > 0.5) == label ? 1 : 0;
  }
  return static_cast<double>(correct) / 1000.0;
}

Outcome preference_recovery() {
  double clean_min = 1.0, noisy_min = 1.0;
  bool counts_ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::size_t n = 0;
    bool per = false;
    clean_min = std::min(clean_min, recovery_accuracy(seed, 0.0, n, per));
    counts_ok = counts_ok && per && n == 1200;
    noisy_min = std::min(noisy_min, recovery_accuracy(seed, 0.25, n, per));
    counts_ok = counts_ok && per && n == 1200;
  }
  return {counts_ok && clean_min >= 0.9 && noisy_min >= 0.75,
          "1200 samples per fit, worst held-out accuracy over 5 seeds " + fmt("%.3f", clean_min) + " clean, " +
              fmt("%.3f", noisy_min) + " noisy"};
}

Outcome antisymmetry() {
  Rng rng(3);
  std::vector<PairwiseSample> samples;
  const Portfolio ref = random_portfolio(rng);
  for (int r = 0; r < 20; ++r) {
    RankingQuery q{"q", ref, {}};
    for (int i = 0; i < 5; ++i) q.candidates.push_back(random_portfolio(rng));
    const auto answer = std::get<RankingResponse>(answer_ranking(DistinctnessOracle::euclidean(), q));
    const auto pairs = ranking_to_pairs(ref, ranked_candidates(q, answer.order));
    samples.insert(samples.end(), pairs.begin(), pairs.end());
  }
  const PreferenceModel fitted = fit_preference(samples);
  int violations = 0;
  for (int t = 0; t < 10000; ++t) {
    PreferenceModel m = fitted;
    if (t % 2 == 1) {
      for (Eigen::Index k = 0; k < m.weights.size(); ++k) m.weights[k] = rng.uniform(-100, 100);
    }
    const Portfolio w = random_portfolio(rng), x = random_portfolio(rng), y = random_portfolio(rng),
                    z = random_portfolio(rng);
    if (predict_more_distinct(m, w, x, y, z) + predict_more_distinct(m, y, z, w, x) != 1.0) ++violations;
    if (predict_more_distinct(m, w, x, w, x) != 0.5) ++violations;
  }
  return {violations == 0, "10000 inputs, " + std::to_string(violations) + " violations"};
}

Outcome alpha_nesting() {
  Rng rng(4);
  int violations = 0, mismatches = 0;
  const std::vector<double> grid = {0.5, 0.6, 0.7, 0.8, 0.9};
  for (int t = 0; t < 100; ++t) {
    const Portfolio ref = random_portfolio(rng);
    std::vector<PoolEntry> entries;
    const std::size_t n = 1 + rng.index(30);
    for (std::size_t i = 0; i < n; ++i) entries.push_back({random_portfolio(rng), rng.normal(), i});
    const CandidatePool pool(ref, entries);
    PreferenceModel model;
    model.weights.resize(5);
    for (Eigen::Index k = 0; k < 5; ++k) model.weights[k] = rng.uniform(-10, 40);
    std::vector<std::vector<std::size_t>> sets;
    for (double a : grid) {
      sets.push_back(alpha_distinct_set(pool, model, a).members);
      std::vector<std::size_t> brute;
      const auto& e = pool.entries();
      for (std::size_t i = 0; i < e.size(); ++i) {
        bool in = true;
        for (std::size_t j = 0; j < i; ++j)
          in = in && predict_more_distinct(model, ref, e[i].portfolio, ref, e[j].portfolio) > a;
        if (in) brute.push_back(i);
      }
      mismatches += brute != sets.back() ? 1 : 0;
    }
    for (std::size_t lo = 0; lo < grid.size(); ++lo)
      for (std::size_t hi = lo + 1; hi < grid.size(); ++hi)
        if (!std::includes(sets[lo].begin(), sets[lo].end(), sets[hi].begin(), sets[hi].end())) ++violations;
  }
  return {violations == 0 && mismatches == 0, "100 instances, " + std::to_string(violations) +
                                                   " nesting violations, " + std::to_string(mismatches) +
                                                   " brute-force mismatches"};
}

Outcome variance_experiment() {
  const std::filesystem::path path = std::filesystem::path(DISTINCTBO_SOURCE_DIR) / "configs" / "example_experiment.json";
  std::ifstream in(path);
  if (!in) return {false, "cannot open " + path.string()};
  ExperimentConfig config = experiment_config_from_json(Json::parse(in), path.parent_path());
  config.seeds.clear();
  for (std::uint64_t s = 1; s <= 10; ++s) config.seeds.push_back(s);
  const PriceSeries series = load_price_series_file(config.data_path);
  const auto outcomes = run_experiment(config, series);

  int variance_wins = 0, mean_ok = 0;
  std::vector<double> blended_means, random_means;
  for (const auto& o : outcomes) {
    if (!o.report) return {false, "no strategy report"};
    const auto& opt = o.report->row("opt_only");
    const auto& blend = o.report->row("blended");
    std::vector<double> seed_random;
    for (const auto* r : o.report->random_rows()) {
      seed_random.push_back(r->mean);
      random_means.push_back(r->mean);
    }
    variance_wins += blend.variance <= opt.variance ? 1 : 0;
    mean_ok += blend.mean >= opt.mean - sample_std(seed_random) ? 1 : 0;
    blended_means.push_back(blend.mean);
  }
  const double blended_spread = sample_std(blended_means);
  const double random_spread = sample_std(random_means);
  const bool pass = variance_wins >= 8 && mean_ok == 10 && random_spread > blended_spread;
  return {pass, "blended variance <= opt_only in " + std::to_string(variance_wins) + "/10 seeds, mean within one std in " +
                    std::to_string(mean_ok) + "/10, mean dispersion random " + fmt("%.2e", random_spread) +
                    " vs blended " + fmt("%.2e", blended_spread)};
}

Outcome determinism_and_resume() {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("distinctbo-acceptance-" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(dir / "sessions");
  {
    std::ofstream out(dir / "prices.csv", std::ios::binary);
    out << format_price_csv(sector_market());
  }
  SessionConfig c;
  c.seed = 77;
  c.oracle = DistinctnessOracle::weighted(late_assets_profile(5));
  c.objective = ObjectiveSpec{(dir / "prices.csv").string(), parse_date("2016-06-08"), 10, 1};
  const Objective objective = make_sharpe_objective(*c.objective);
  const std::string first = to_json(run_session(c, objective, c.oracle)).dump();
  const std::string second = to_json(run_session(c, objective, c.oracle)).dump();
  const bool identical = first == second;

  Json body = to_json(c);
  int resumed_ok = 0;
  // After creation, in the middle of phase 1 and in the middle of phase 2.
  const std::vector<std::size_t> halts = {1, 40, 110};
  for (std::size_t halt : halts) {
    std::filesystem::remove_all(dir / "sessions");
    std::filesystem::create_directories(dir / "sessions");
    ServiceOptions options;
    options.data_dir = dir / "sessions";
    std::string id;
    {
      options.halt_after_transitions = halt;
      SessionService crashed(options);
      const ApiResponse created = crashed.create_session(body.dump());
      if (created.status != 201) break;
      id = created.body["session_id"];
      crashed.wait(id);
      crashed.shutdown();
    }
    options.halt_after_transitions.reset();
    SessionService restarted(options);
    restarted.resume();
    restarted.wait(id);
    const ApiResponse results = restarted.get_results(id, std::nullopt, false);
    resumed_ok += results.status == 200 && results.body.dump() == first ? 1 : 0;
    restarted.shutdown();
  }
  std::filesystem::remove_all(dir);
  return {identical && resumed_ok == 3, std::string("repeat run ") + (identical ? "byte-identical" : "differs") +
                                            ", " + std::to_string(resumed_ok) + "/3 crash points resume to the same result"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"simplex-correctness", 1.0, simplex_correctness},
      {"gp-sanity", 30.0, gp_sanity},
      {"bo-effectiveness", 300.0, bo_effectiveness},
      {"preference-recovery", 60.0, preference_recovery},
      {"antisymmetry", 60.0, antisymmetry},
      {"alpha-nesting", 60.0, alpha_nesting},
      {"variance-reduction", 900.0, variance_experiment},
      {"determinism-crash-resume", 600.0, determinism_and_resume},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %s (%.1f s of %.0f s): %s\n", pass ? "PASS" : "FAIL", c.name, secs, c.budget_seconds,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
