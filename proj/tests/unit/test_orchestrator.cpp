#include <algorithm>

#include "doctest.h"

#include "distinctbo/errors.h"
#include "distinctbo/orchestrator.h"
#include "distinctbo/serialization.h"
#include "helpers.h"

using namespace distinctbo;
using testing::fast_config;

namespace {

// Smooth objective peaking at a known interior portfolio.
Objective target_objective() {
  Eigen::VectorXd target(5);
  target << 0.3, 0.1, 0.25, 0.15, 0.2;
  return {default_asset_names(5), [target](const Portfolio& p) { return -(p.weights() - target).squaredNorm(); }};
}

Session finished_phase1(const SessionConfig& config, const Objective& objective) {
  Session s(config, objective);
  s.start();
  while (s.phase() == Phase::kPhase1) s.step_phase1();
  return s;
}

RankingResponse answer(const Session& s) {
  return std::get<RankingResponse>(answer_ranking(s.config().oracle, s.state().pending->query));
}

}  // namespace

TEST_CASE("start evaluates the initial design") {
  Session s(fast_config(), target_objective());
  CHECK(s.phase() == Phase::kInit);
  s.start();
  CHECK(s.phase() == Phase::kPhase1);
  CHECK(s.state().observations.size() == 6);
  CHECK(s.phase1_remaining() == 8);
  CHECK_THROWS_AS(s.start(), StateError);
}

TEST_CASE("configuration errors name the field") {
  auto c = fast_config();
  c.init_design = 20;
  try {
    Session s(c, target_objective());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("n_phase1", 0) == 0);
  }
  c = fast_config();
  c.m = 1;
  CHECK_THROWS_AS(Session(c, target_objective()), ConfigError);
  c = fast_config();
  c.oracle = DistinctnessOracle::weighted(Eigen::Vector3d(1, 1, 1));
  CHECK_THROWS_AS(Session(c, target_objective()), ConfigError);
}

TEST_CASE("phase 1 ends with the best observation as x_opt") {
  Session s = finished_phase1(fast_config(), target_objective());
  CHECK(s.phase() == Phase::kPhase2);
  CHECK(s.state().observations.size() == 14);
  const auto& obs = s.state().observations;
  const auto best = std::max_element(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  CHECK(*s.state().x_opt_index == static_cast<std::size_t>(best - obs.begin()));
  CHECK_THROWS_AS(s.step_phase1(), StateError);
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (std::size_t j = i + 1; j < obs.size(); ++j)
      CHECK((obs[i].point.log_coords() - obs[j].point.log_coords()).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("seeded sessions are reproducible and seeds matter") {
  const Session a = finished_phase1(fast_config(3), target_objective());
  const Session b = finished_phase1(fast_config(3), target_objective());
  const Session c = finished_phase1(fast_config(4), target_objective());
  CHECK(to_json(a.state()).dump() == to_json(b.state()).dump());
  CHECK(to_json(a.state()).dump() != to_json(c.state()).dump());
}

TEST_CASE("phase 2 query protocol") {
  Session s = finished_phase1(fast_config(), target_objective());
  const Portfolio reference = to_simplex(s.state().observations[*s.state().x_opt_index].point);
  const RankingQuery q = s.propose_query();
  CHECK(q.candidates.size() == 4);
  CHECK(q.reference == reference);
  for (std::size_t i = 0; i < q.candidates.size(); ++i)
    for (std::size_t j = i + 1; j < q.candidates.size(); ++j) CHECK_FALSE(q.candidates[i] == q.candidates[j]);
  CHECK(s.awaiting_ranking());
  try {
    s.propose_query();
    FAIL("expected StateError");
  } catch (const StateError& e) {
    CHECK(std::string(e.what()) == "awaiting ranking");
  }

  // The same state proposes the same query.
  Session copy = Session::restore(s.config(), s.state(), s.objective());
  copy.submit_ranking(answer(copy));
  Session twin = Session::restore(s.config(), copy.state(), s.objective());
  CHECK(copy.propose_query().candidates == twin.propose_query().candidates);

  CHECK_THROWS_AS(s.submit_ranking({"q-99", {0, 1, 2, 3}}), StaleQueryError);
  CHECK_THROWS_AS(s.submit_ranking({q.id, {0, 0, 1, 2}}), InvalidRankingError);
  CHECK(s.awaiting_ranking());
  const std::size_t before = s.state().observations.size();
  const std::vector<std::size_t> order = {2, 0, 3, 1};
  s.submit_ranking({q.id, order});
  CHECK_FALSE(s.awaiting_ranking());
  CHECK(s.state().observations.size() == before + 1);
  CHECK(s.state().rankings.size() == 1);
  CHECK(s.state().preference_model.has_value());
  CHECK(to_simplex(s.state().observations.back().point) == q.candidates[1]);
  CHECK(s.state().observations.back().query_id == q.id);
  CHECK_THROWS_AS(s.submit_ranking({q.id, order}), StaleQueryError);
}

TEST_CASE("ranking five candidates adds twenty samples") {
  auto c = fast_config();
  c.m = 5;
  Session s = finished_phase1(c, target_objective());
  std::vector<PairwiseSample> all;
  for (int r = 0; r < 2; ++r) {
    s.propose_query();
    s.submit_ranking(answer(s));
    all.clear();
    for (const auto& rec : s.state().rankings) {
      const auto pairs = ranking_to_pairs(rec.query.reference, ranked_candidates(rec.query, rec.response.order));
      all.insert(all.end(), pairs.begin(), pairs.end());
    }
    CHECK(all.size() == 20 * static_cast<std::size_t>(r + 1));
  }
  const PreferenceModel refit = fit_preference(all, c.lambda, c.feature_space);
  CHECK(refit.weights == s.state().preference_model->weights);
}

TEST_CASE("completed sessions satisfy the trajectory invariants") {
  auto c = fast_config(5);
  c.oracle = DistinctnessOracle::euclidean();
  const Objective obj = testing::sector_objective();
  Session s(c, obj);
  s.start();
  while (s.phase() == Phase::kPhase1) s.step_phase1();
  const std::size_t x_opt = *s.state().x_opt_index;
  while (s.can_propose()) {
    s.propose_query();
    s.submit_ranking(answer(s));
    CHECK(*s.state().x_opt_index == x_opt);
  }
  CHECK(s.phase() == Phase::kDone);
  CHECK(s.state().observations.size() == c.n_phase1 + c.n_phase2);
  const Portfolio reference = to_simplex(s.state().observations[x_opt].point);
  const auto& obs = s.state().observations;
  std::size_t k = c.n_phase1;
  for (const auto& r : s.state().rankings) {
    CHECK(r.query.reference == reference);
    CHECK(to_simplex(obs[k].point) == r.query.candidates[r.response.order.back()]);
    ++k;
  }
  const SessionResult result = s.result();
  CHECK(result.pool.size() == c.n_phase2);
  CHECK(result.x_opt_portfolio == reference);
  CHECK_FALSE(result.efficient.empty());
  CHECK(result.n_rankings == c.n_phase2);
}

TEST_CASE("run_session is bit-identical across runs") {
  auto c = fast_config(6);
  const auto oracle = DistinctnessOracle::weighted(late_assets_profile(5));
  c.oracle = oracle;
  const Objective obj = testing::sector_objective();
  const std::string a = to_json(run_session(c, obj, oracle)).dump();
  const std::string b = to_json(run_session(c, obj, oracle)).dump();
  CHECK(a == b);
  CHECK_THROWS_AS(run_session(c, obj, DistinctnessOracle::deferred()), ConfigError);
}

TEST_CASE("an empty phase 2 returns x_opt alone") {
  auto c = fast_config();
  c.n_phase2 = 0;
  Session s = finished_phase1(c, target_objective());
  CHECK(s.phase() == Phase::kDone);
  CHECK_FALSE(s.can_propose());
  const SessionResult r = run_session(c, target_objective(), DistinctnessOracle::euclidean());
  CHECK(r.pool.empty());
  CHECK(r.efficient == std::vector<Portfolio>{r.x_opt_portfolio});
  CHECK(r.blended == r.x_opt_portfolio);
  CHECK(r.n_observations == c.n_phase1);
}

TEST_CASE("state survives a save and load mid-run") {
  auto c = fast_config(7);
  const Objective obj = testing::sector_objective();
  Session reference(c, obj);
  reference.start();
  std::vector<std::string> checkpoints;
  Session* live = &reference;
  std::optional<Session> resumed;
  int transitions = 0;
  while (live->phase() != Phase::kDone) {
    if (live->phase() == Phase::kPhase1) {
      live->step_phase1();
    } else if (live->awaiting_ranking()) {
      live->submit_ranking(answer(*live));
    } else {
      live->propose_query();
    }
    if (++transitions % 5 == 0 || live->awaiting_ranking()) {
      const Json saved = Json::parse(to_json(live->state()).dump());
      const SessionConfig cfg = session_config_from_json(Json::parse(to_json(c).dump()));
      resumed.emplace(Session::restore(cfg, session_state_from_json(saved), obj));
      live = &*resumed;
    }
  }
  const SessionResult uninterrupted = run_session(c, obj, c.oracle);
  CHECK(to_json(live->result()).dump() == to_json(uninterrupted).dump());
}

TEST_CASE("initialization queries train the classifier before phase 2 evaluations") {
  auto c = fast_config(8);
  c.init_queries = 2;
  Session s = finished_phase1(c, target_objective());
  const std::size_t n = s.state().observations.size();
  for (int i = 0; i < 2; ++i) {
    const RankingQuery& q = s.propose_query();
    CHECK(q.id.rfind("init-", 0) == 0);
    s.submit_ranking(answer(s));
    CHECK(s.state().observations.size() == n);
  }
  CHECK(s.state().preference_model.has_value());
  CHECK(s.propose_query().id.rfind("q-", 0) == 0);
  const SessionResult r = run_session(c, target_objective(), c.oracle);
  CHECK(r.n_rankings == c.n_phase2 + 2);
  CHECK(r.pool.size() == c.n_phase2);
}

TEST_CASE("phase 1 finds the optimum of a one-dimensional slice") {
  // Only the first log ratio matters; a dense grid gives the true optimum.
  const auto f = [](double u) { return std::exp(-(u - 1.2) * (u - 1.2)) + 0.3 * std::exp(-4.0 * (u + 1.5) * (u + 1.5)); };
  double grid_best = -1.0;
  for (int i = 0; i <= 10000; ++i) grid_best = std::max(grid_best, f(-3.0 + 6.0 * i / 10000.0));
  const Objective obj{default_asset_names(2),
                      [f](const Portfolio& p) { return f(std::log10(p[0] / p[1])); }};
  SessionConfig c;
  c.n_phase1 = 20;
  c.n_phase2 = 0;
  c.seed = 9;
  const SessionResult r = run_session(c, obj, DistinctnessOracle::euclidean());
  CHECK(r.x_opt_value >= 0.98 * grid_best);
}
