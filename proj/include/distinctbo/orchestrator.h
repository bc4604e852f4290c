#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "distinctbo/acquisition.h"
#include "distinctbo/dates.h"
#include "distinctbo/efficient_set.h"
#include "distinctbo/gp.h"
#include "distinctbo/oracle.h"
#include "distinctbo/preference.h"

namespace distinctbo {

// Backtested Sharpe objective on a price file.
struct ObjectiveSpec {
  std::string data_path;
  Date anchor;
  std::size_t lookback = 10;
  int ddof = 1;
};

struct SessionConfig {
  std::size_t n_phase1 = 60;  // evaluations in phase 1, initial design included
  std::size_t n_phase2 = 60;  // rankings in phase 2, one evaluation each
  std::size_t m = 5;
  std::size_t init_design = 8;
  std::size_t init_queries = 0;  // batch rankings asked right after x_opt
  double alpha_default = 0.6;
  double lambda = kDefaultPreferenceLambda;
  FeatureSpace feature_space = FeatureSpace::kSimplex;
  InclusionRule inclusion_rule = InclusionRule::kAllPreceding;
  std::optional<ObjectiveSpec> objective;
  DistinctnessOracle oracle;
  std::uint64_t seed = 0;
  GPOptions gp;
  AcquisitionOptions acquisition;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// The function being optimized, on portfolios of `asset_names.size()` assets.
struct Objective {
  std::vector<std::string> asset_names;
  std::function<double(const Portfolio&)> evaluate;

  std::size_t assets() const { return asset_names.size(); }
};

// Loads the price file and builds the Sharpe objective for the anchor date.
// Relative data paths resolve against `base_dir`.
Objective make_sharpe_objective(const ObjectiveSpec& spec, const std::filesystem::path& base_dir = {});

enum class Phase { kInit, kPhase1, kPhase2, kDone };
std::string to_string(Phase phase);
Phase phase_from_string(const std::string& name);

struct ObservationRecord {
  SearchPoint point;
  double value;
  Phase phase;
  std::string query_id;  // phase-2 evaluations only
};

struct PendingQuery {
  RankingQuery query;
  std::vector<SearchPoint> points;  // search coordinates of the candidates
  bool initialization = false;
};

struct RankingRecord {
  RankingQuery query;
  RankingResponse response;
  bool initialization = false;
};

struct SessionState {
  Phase phase = Phase::kInit;
  std::vector<ObservationRecord> observations;
  std::optional<std::size_t> x_opt_index;
  std::optional<PendingQuery> pending;
  std::vector<RankingRecord> rankings;
  std::optional<PreferenceModel> preference_model;
  std::size_t queries_issued = 0;
  // Surrogate hyperparameters of the latest fit and the training set size of
  // the latest full multi-start fit.
  std::optional<GPHyperparameters> gp_hyperparameters;
  std::size_t gp_full_fit_size = 0;
};

struct SessionResult {
  std::vector<std::string> asset_names;
  SearchPoint x_opt;
  Portfolio x_opt_portfolio;
  double x_opt_value;
  std::vector<SearchPoint> pool_points;  // phase-2 evaluations, evaluation order
  CandidatePool pool;
  std::optional<PreferenceModel> model;
  double alpha;
  InclusionRule rule;
  std::vector<std::size_t> members;  // efficient set, indices into pool
  std::vector<Portfolio> efficient;
  Portfolio blended;
  std::size_t n_observations;
  std::size_t n_rankings;

  // Same session viewed at another alpha.
  SessionResult with_alpha(double alpha) const;
};

// Two-phase search as a resumable state machine. Mutating calls need
// exclusive access; const accessors are safe to call concurrently with each
// other.
class Session {
 public:
  Session(SessionConfig config, Objective objective);
  static Session restore(SessionConfig config, SessionState state, Objective objective);

  // Evaluates the Latin hypercube design; phase becomes phase1.
  void start();
  // One EI-maximizing evaluation. On the last one x_opt is fixed and phase 2
  // begins. Throws StateError "phase over" once the budget is spent.
  void step_phase1();
  // Constant-liar batch of m candidates as a ranking query. Throws
  // StateError "awaiting ranking" while a query is pending.
  const RankingQuery& propose_query();
  // Refits the preference model on all rankings and evaluates the most
  // distinct candidate. Throws StaleQueryError / InvalidRankingError.
  void submit_ranking(const RankingResponse& response);

  Phase phase() const { return state_.phase; }
  bool awaiting_ranking() const { return state_.pending.has_value(); }
  bool can_propose() const;
  std::size_t phase1_remaining() const;

  const SessionConfig& config() const { return config_; }
  const SessionState& state() const { return state_; }
  const Objective& objective() const { return objective_; }

  // Requires phase 2 or later (x_opt known).
  SessionResult result() const { return result(config_.alpha_default); }
  SessionResult result(double alpha) const;

 private:
  std::vector<Observation> gp_observations() const;
  // Multi-start fit every gp.refit_period evaluations, warm-started
  // refinement otherwise. Records the outcome in `hyper` / `full_size`.
  GPModel fit_surrogate(Rng& rng, std::optional<GPHyperparameters>& hyper, std::size_t& full_size) const;
  std::vector<SearchPoint> observed_points() const;
  void finish_phase1();
  std::size_t phase2_evaluations() const;
  std::size_t init_rankings() const;
  Eigen::Index search_dim() const { return static_cast<Eigen::Index>(objective_.assets()) - 1; }

  SessionConfig config_;
  Objective objective_;
  SessionState state_;
};

// Drives a session to completion with a simulated oracle. Throws ConfigError
// for the deferred oracle.
SessionResult run_session(const SessionConfig& config, const Objective& objective,
                          const DistinctnessOracle& oracle);

}  // namespace distinctbo
