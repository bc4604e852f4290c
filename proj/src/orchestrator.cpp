#include "distinctbo/orchestrator.h"

#include <algorithm>
#include <memory>

#include "distinctbo/errors.h"
#include "distinctbo/market_data.h"

namespace distinctbo {

namespace {

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field + ": " + message);
}

}  // namespace

void SessionConfig::validate() const {
  require(m >= 2, "m", "must be at least 2");
  require(init_design >= 2, "init_design", "must be at least 2");
  require(n_phase1 >= init_design, "n_phase1", "must be at least init_design");
  require(alpha_default > 0.0 && alpha_default < 1.0, "alpha", "must lie in (0, 1)");
  require(lambda > 0.0, "lambda", "must be positive");
  require(gp.n_restarts >= 1, "gp.restarts", "must be at least 1");
  require(gp.refit_period >= 1, "gp.refit_period", "must be at least 1");
  require(gp.warm_extra_starts >= 0, "gp.warm_extra_starts", "must not be negative");
  require(acquisition.n_candidates >= 1, "acquisition.candidates", "must be at least 1");
  if (objective) {
    require(!objective->data_path.empty(), "objective.data", "must name a price file");
    require(objective->lookback >= 2, "objective.lookback", "must be at least 2");
  }
  try {
    oracle.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("oracle: ") + e.what());
  }
}

Objective make_sharpe_objective(const ObjectiveSpec& spec, const std::filesystem::path& base_dir) {
  std::filesystem::path path(spec.data_path);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  const PriceSeries series = load_price_series_file(path);
  auto window = std::make_shared<const ReturnWindow>(return_window(series, spec.anchor, spec.lookback));
  const SharpeOptions options{spec.ddof};
  return {series.assets, [window, options](const Portfolio& p) {
            return sharpe_objective(*window, p, options);
          }};
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::kInit: return "init";
    case Phase::kPhase1: return "phase1";
    case Phase::kPhase2: return "phase2";
    case Phase::kDone: return "done";
  }
  return "unknown";
}

Phase phase_from_string(const std::string& name) {
  if (name == "init") return Phase::kInit;
  if (name == "phase1") return Phase::kPhase1;
  if (name == "phase2") return Phase::kPhase2;
  if (name == "done") return Phase::kDone;
  throw std::invalid_argument("unknown phase \"" + name + "\"");
}

Session::Session(SessionConfig config, Objective objective)
    : config_(std::move(config)), objective_(std::move(objective)) {
  config_.validate();
  if (objective_.assets() < 2) throw ConfigError("objective needs at least two assets");
  if (!objective_.evaluate) throw ConfigError("objective has no evaluator");
  if (config_.oracle.weight_profile.size() > 0 &&
      config_.oracle.weight_profile.size() != static_cast<Eigen::Index>(objective_.assets())) {
    throw ConfigError("oracle: weights must have one entry per asset");
  }
}

Session Session::restore(SessionConfig config, SessionState state, Objective objective) {
  Session s(std::move(config), std::move(objective));
  s.state_ = std::move(state);
  return s;
}

std::vector<Observation> Session::gp_observations() const {
  std::vector<Observation> out;
  out.reserve(state_.observations.size());
  for (const auto& o : state_.observations) out.push_back({o.point, o.value});
  return out;
}

GPModel Session::fit_surrogate(Rng& rng, std::optional<GPHyperparameters>& hyper,
                              std::size_t& full_size) const {
  const std::size_t n = state_.observations.size();
  const bool full = !state_.gp_hyperparameters || config_.gp.refit_period <= 1 ||
                    n >= state_.gp_full_fit_size + config_.gp.refit_period;
  GPModel model = GPModel::fit(gp_observations(), config_.gp, rng, full ? nullptr : &*state_.gp_hyperparameters);
  hyper = model.hyperparameters();
  full_size = full ? n : state_.gp_full_fit_size;
  return model;
}

std::vector<SearchPoint> Session::observed_points() const {
  std::vector<SearchPoint> out;
  out.reserve(state_.observations.size());
  for (const auto& o : state_.observations) out.push_back(o.point);
  return out;
}

std::size_t Session::phase1_remaining() const {
  std::size_t done = 0;
  for (const auto& o : state_.observations) done += o.phase == Phase::kPhase1 ? 1 : 0;
  return config_.n_phase1 - std::min(done, config_.n_phase1);
}

std::size_t Session::phase2_evaluations() const {
  return static_cast<std::size_t>(std::count_if(state_.observations.begin(), state_.observations.end(),
                                                [](const auto& o) { return o.phase == Phase::kPhase2; }));
}

std::size_t Session::init_rankings() const {
  return static_cast<std::size_t>(std::count_if(state_.rankings.begin(), state_.rankings.end(),
                                                [](const auto& r) { return r.initialization; }));
}

void Session::start() {
  if (state_.phase != Phase::kInit) throw StateError("session already started");
  Rng rng(derive_seed(config_.seed, "initial-design"));
  const auto design = latin_hypercube(config_.init_design, search_dim(), rng);
  std::vector<ObservationRecord> evaluated;
  for (const auto& p : design) {
    evaluated.push_back({p, objective_.evaluate(to_simplex(p)), Phase::kPhase1, {}});
  }
  state_.observations = std::move(evaluated);
  state_.phase = Phase::kPhase1;
  if (phase1_remaining() == 0) finish_phase1();
}

void Session::step_phase1() {
  if (state_.phase != Phase::kPhase1 || phase1_remaining() == 0) throw StateError("phase over");
  const std::size_t step = state_.observations.size();
  Rng rng(derive_seed(config_.seed, "phase1", step));
  std::optional<GPHyperparameters> hyper;
  std::size_t full_size = 0;
  const GPModel model = fit_surrogate(rng, hyper, full_size);
  const auto exclude = observed_points();
  const AcquisitionResult next = maximize_acquisition(model, exclude, rng, config_.acquisition);
  const double value = objective_.evaluate(to_simplex(next.point));
  state_.observations.push_back({next.point, value, Phase::kPhase1, {}});
  state_.gp_hyperparameters = std::move(hyper);
  state_.gp_full_fit_size = full_size;
  if (phase1_remaining() == 0) finish_phase1();
}

void Session::finish_phase1() {
  std::size_t best = 0;
  for (std::size_t i = 1; i < state_.observations.size(); ++i) {
    if (state_.observations[i].value > state_.observations[best].value) best = i;
  }
  state_.x_opt_index = best;
  state_.phase = (config_.n_phase2 > 0 || config_.init_queries > 0) ? Phase::kPhase2 : Phase::kDone;
}

bool Session::can_propose() const {
  if (state_.phase != Phase::kPhase2 || state_.pending) return false;
  return init_rankings() < config_.init_queries || phase2_evaluations() < config_.n_phase2;
}

const RankingQuery& Session::propose_query() {
  if (state_.pending) throw StateError("awaiting ranking");
  if (state_.phase != Phase::kPhase2) throw StateError("no ranking queries outside phase 2");
  if (!can_propose()) throw StateError("phase over");

  const std::size_t k = state_.queries_issued;
  const bool initialization = init_rankings() < config_.init_queries;
  std::vector<SearchPoint> points;
  std::optional<GPHyperparameters> hyper = state_.gp_hyperparameters;
  std::size_t full_size = state_.gp_full_fit_size;
  if (initialization) {
    Rng rng(derive_seed(config_.seed, "init-query", k));
    points = latin_hypercube(config_.m, search_dim(), rng);
  } else {
    Rng rng(derive_seed(config_.seed, "phase2", k));
    const GPModel model = fit_surrogate(rng, hyper, full_size);
    points = constant_liar_batch(model, config_.m, observed_points(), rng, config_.acquisition);
  }

  const Portfolio reference = to_simplex(state_.observations[*state_.x_opt_index].point);
  RankingQuery query{(initialization ? "init-" : "q-") + std::to_string(k + 1), reference, {}};
  for (const auto& p : points) query.candidates.push_back(to_simplex(p));
  state_.pending = PendingQuery{std::move(query), std::move(points), initialization};
  state_.queries_issued = k + 1;
  state_.gp_hyperparameters = std::move(hyper);
  state_.gp_full_fit_size = full_size;
  return state_.pending->query;
}

void Session::submit_ranking(const RankingResponse& response) {
  if (!state_.pending) throw StaleQueryError("no ranking query is pending");
  const PendingQuery& pending = *state_.pending;
  if (response.query_id != pending.query.id) {
    throw StaleQueryError("ranking refers to query " + response.query_id + " but " +
                          pending.query.id + " is pending");
  }
  validate_order(pending.query, response.order);

  // Everything that can throw happens before the state is touched.
  std::vector<RankingRecord> rankings = state_.rankings;
  rankings.push_back({pending.query, response, pending.initialization});
  std::vector<PairwiseSample> samples;
  for (const auto& r : rankings) {
    const auto ranked = ranked_candidates(r.query, r.response.order);
    const auto pairs = ranking_to_pairs(r.query.reference, ranked);
    samples.insert(samples.end(), pairs.begin(), pairs.end());
  }
  std::optional<PreferenceModel> model;
  try {
    model = fit_preference(samples, config_.lambda, config_.feature_space);
  } catch (const std::invalid_argument&) {
    // Identical candidates carry no information; keep the previous model.
    model = state_.preference_model;
  }
  std::optional<ObservationRecord> evaluated;
  if (!pending.initialization) {
    const std::size_t most_distinct = response.order.back();
    const SearchPoint& p = pending.points[most_distinct];
    evaluated = ObservationRecord{p, objective_.evaluate(to_simplex(p)), Phase::kPhase2, pending.query.id};
  }

  state_.rankings = std::move(rankings);
  state_.preference_model = std::move(model);
  if (evaluated) state_.observations.push_back(std::move(*evaluated));
  state_.pending.reset();
  if (init_rankings() >= config_.init_queries && phase2_evaluations() >= config_.n_phase2) {
    state_.phase = Phase::kDone;
  }
}

SessionResult Session::result(double alpha) const {
  if (!state_.x_opt_index) throw StateError("x_opt not determined yet");
  const auto& best = state_.observations[*state_.x_opt_index];
  const Portfolio x_opt = to_simplex(best.point);
  std::vector<PoolEntry> entries;
  std::vector<SearchPoint> points;
  for (const auto& o : state_.observations) {
    if (o.phase != Phase::kPhase2) continue;
    entries.push_back({to_simplex(o.point), o.value, points.size()});
    points.push_back(o.point);
  }
  SessionResult r{objective_.asset_names,
                  best.point,
                  x_opt,
                  best.value,
                  std::move(points),
                  CandidatePool(x_opt, std::move(entries)),
                  state_.preference_model,
                  config_.alpha_default,
                  config_.inclusion_rule,
                  {},
                  {x_opt},
                  x_opt,
                  state_.observations.size(),
                  state_.rankings.size()};
  return r.with_alpha(alpha);
}

SessionResult SessionResult::with_alpha(double a) const {
  SessionResult r = *this;
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  r.alpha = a;
  r.members.clear();
  if (!pool.empty() && model) {
    r.members = alpha_distinct_set(pool, *model, a, rule).members;
  }
  r.efficient = efficient_portfolios(x_opt_portfolio, pool, model, a, rule);
  r.blended = blended_strategy(x_opt_portfolio, r.efficient);
  return r;
}

SessionResult run_session(const SessionConfig& config, const Objective& objective,
                          const DistinctnessOracle& oracle) {
  if (!oracle.simulated()) {
    throw ConfigError("oracle: deferred oracles need a human; run the session through `serve`");
  }
  Session session(config, objective);
  session.start();
  while (session.phase() == Phase::kPhase1) session.step_phase1();
  while (session.can_propose()) {
    const RankingQuery& query = session.propose_query();
    const auto answer = answer_ranking(oracle, query);
    session.submit_ranking(std::get<RankingResponse>(answer));
  }
  return session.result();
}

}  // namespace distinctbo
