#include "distinctbo/serialization.h"

#include "distinctbo/errors.h"

namespace distinctbo {

namespace {

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// Reads an optional config field, reporting type errors against its name.
template <typename T>
void read_field(const Json& j, const char* key, T& out, const std::string& prefix = {}) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!it->is_number_integer() || it->get<long long>() < 0) throw std::invalid_argument("");
      out = it->get<T>();
    } else if constexpr (std::is_same_v<T, int>) {
      if (!it->is_number_integer()) throw std::invalid_argument("");
      out = it->get<int>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw std::invalid_argument("");
      out = it->get<double>();
    } else {
      if (!it->is_string()) throw std::invalid_argument("");
      out = it->get<std::string>();
    }
  } catch (const std::exception&) {
    const char* expected = std::is_same_v<T, std::string> ? "a string"
                           : std::is_same_v<T, double>    ? "a number"
                                                          : "a non-negative integer";
    throw ConfigError(prefix + key + ": expected " + expected);
  }
}

}  // namespace

Json to_json(const Portfolio& p) { return vector_json(p.weights()); }

Portfolio portfolio_from_json(const Json& j) { return Portfolio(vector_from_json(j)); }

Json to_json(const SearchPoint& p) {
  return Json{{"coords", vector_json(p.log_coords())}, {"scale", "log"}};
}

SearchPoint search_point_from_json(const Json& j) {
  const std::string scale = j.value("scale", "log");
  Eigen::VectorXd coords = vector_from_json(j.at("coords"));
  if (scale == "log") return SearchPoint::from_log(std::move(coords));
  if (scale == "raw") return SearchPoint::from_raw(coords);
  throw std::invalid_argument("search point scale must be \"log\" or \"raw\"");
}

Json to_json(const PreferenceModel& m) {
  return Json{{"weights", vector_json(m.weights)},
              {"lambda", m.lambda},
              {"feature_space", to_string(m.feature_space)}};
}

PreferenceModel preference_model_from_json(const Json& j) {
  return {vector_from_json(j.at("weights")), j.at("lambda").get<double>(),
          feature_space_from_string(j.value("feature_space", "simplex"))};
}

Json to_json(const RankingQuery& q, const std::vector<std::string>& asset_names) {
  Json cands = Json::array();
  for (const auto& c : q.candidates) cands.push_back(to_json(c));
  Json out{{"query_id", q.id}, {"reference", to_json(q.reference)}, {"candidates", cands}};
  if (!asset_names.empty()) out["assets"] = asset_names;
  return out;
}

RankingQuery ranking_query_from_json(const Json& j) {
  RankingQuery q{j.at("query_id").get<std::string>(), portfolio_from_json(j.at("reference")), {}};
  for (const auto& c : j.at("candidates")) q.candidates.push_back(portfolio_from_json(c));
  return q;
}

Json to_json(const RankingResponse& r) { return Json{{"query_id", r.query_id}, {"order", r.order}}; }

RankingResponse ranking_response_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("query_id") || !j["query_id"].is_string()) {
    throw InvalidRankingError("body needs a string query_id");
  }
  if (!j.contains("order") || !j["order"].is_array()) {
    throw InvalidRankingError("body needs an integer array order");
  }
  RankingResponse r{j["query_id"].get<std::string>(), {}};
  for (const auto& v : j["order"]) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw InvalidRankingError("order entries must be non-negative integers");
    }
    r.order.push_back(v.get<std::size_t>());
  }
  return r;
}

Json to_json(const DistinctnessOracle& o) {
  Json out{{"kind", to_string(o.kind)}, {"noise", o.noise_scale}, {"seed", o.seed}};
  if (o.weight_profile.size() > 0) out["weights"] = vector_json(o.weight_profile);
  return out;
}

DistinctnessOracle oracle_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("oracle: expected an object");
  DistinctnessOracle o;
  std::string kind = "euclidean";
  read_field(j, "kind", kind, "oracle.");
  o.kind = oracle_kind_from_string(kind);
  read_field(j, "noise", o.noise_scale, "oracle.");
  read_field(j, "seed", o.seed, "oracle.");
  if (j.contains("weights")) {
    try {
      o.weight_profile = vector_from_json(j["weights"]);
    } catch (const std::invalid_argument&) {
      throw ConfigError("oracle.weights: expected an array of numbers");
    }
  }
  if (o.kind == OracleKind::kEuclidean) o.weight_profile.resize(0);
  o.validate();
  return o;
}

Json to_json(const SessionConfig& c) {
  Json out{{"n_phase1", c.n_phase1},
           {"n_phase2", c.n_phase2},
           {"m", c.m},
           {"init_design", c.init_design},
           {"init_queries", c.init_queries},
           {"alpha", c.alpha_default},
           {"lambda", c.lambda},
           {"feature_space", to_string(c.feature_space)},
           {"inclusion_rule", to_string(c.inclusion_rule)},
           {"oracle", to_json(c.oracle)},
           {"seed", c.seed},
           {"gp", {{"restarts", c.gp.n_restarts}, {"jitter", c.gp.jitter}, {"refit_period", c.gp.refit_period},
                   {"warm_extra_starts", c.gp.warm_extra_starts}}},
           {"acquisition",
            {{"candidates", c.acquisition.n_candidates},
             {"polish_starts", c.acquisition.n_polish_starts},
             {"polish_iterations", c.acquisition.polish_iterations}}}};
  if (c.objective) {
    out["objective"] = {{"data", c.objective->data_path},
                        {"anchor", format_date(c.objective->anchor)},
                        {"lookback", c.objective->lookback},
                        {"ddof", c.objective->ddof}};
  }
  return out;
}

SessionConfig session_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  SessionConfig c;
  read_field(j, "n_phase1", c.n_phase1);
  read_field(j, "n_phase2", c.n_phase2);
  read_field(j, "m", c.m);
  read_field(j, "init_design", c.init_design);
  read_field(j, "init_queries", c.init_queries);
  read_field(j, "alpha", c.alpha_default);
  read_field(j, "lambda", c.lambda);
  read_field(j, "seed", c.seed);
  std::string name;
  if (j.contains("feature_space")) {
    read_field(j, "feature_space", name);
    c.feature_space = feature_space_from_string(name);
  }
  if (j.contains("inclusion_rule")) {
    read_field(j, "inclusion_rule", name);
    c.inclusion_rule = inclusion_rule_from_string(name);
  }
  if (j.contains("oracle")) c.oracle = oracle_from_json(j["oracle"]);
  if (const auto it = j.find("gp"); it != j.end() && it->is_object()) {
    read_field(*it, "restarts", c.gp.n_restarts, "gp.");
    read_field(*it, "jitter", c.gp.jitter, "gp.");
    read_field(*it, "refit_period", c.gp.refit_period, "gp.");
    read_field(*it, "warm_extra_starts", c.gp.warm_extra_starts, "gp.");
  }
  if (const auto it = j.find("acquisition"); it != j.end() && it->is_object()) {
    read_field(*it, "candidates", c.acquisition.n_candidates, "acquisition.");
    read_field(*it, "polish_starts", c.acquisition.n_polish_starts, "acquisition.");
    read_field(*it, "polish_iterations", c.acquisition.polish_iterations, "acquisition.");
  }
  if (const auto it = j.find("objective"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ConfigError("objective: expected an object");
    ObjectiveSpec spec;
    read_field(*it, "data", spec.data_path, "objective.");
    std::string anchor;
    read_field(*it, "anchor", anchor, "objective.");
    if (anchor.empty()) throw ConfigError("objective.anchor: required");
    try {
      spec.anchor = parse_date(anchor);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("objective.anchor: ") + e.what());
    }
    read_field(*it, "lookback", spec.lookback, "objective.");
    read_field(*it, "ddof", spec.ddof, "objective.");
    c.objective = spec;
  }
  c.validate();
  return c;
}

namespace {

Json observation_json(const ObservationRecord& o) {
  Json out{{"point", to_json(o.point)}, {"value", o.value}, {"phase", to_string(o.phase)}};
  if (!o.query_id.empty()) out["query_id"] = o.query_id;
  return out;
}

ObservationRecord observation_from_json(const Json& j) {
  return {search_point_from_json(j.at("point")), j.at("value").get<double>(),
          phase_from_string(j.at("phase").get<std::string>()), j.value("query_id", "")};
}

Json points_json(const std::vector<SearchPoint>& pts) {
  Json out = Json::array();
  for (const auto& p : pts) out.push_back(to_json(p));
  return out;
}

}  // namespace

Json to_json(const SessionState& s) {
  Json obs = Json::array();
  for (const auto& o : s.observations) obs.push_back(observation_json(o));
  Json rankings = Json::array();
  for (const auto& r : s.rankings) {
    rankings.push_back({{"query", to_json(r.query)},
                        {"response", to_json(r.response)},
                        {"initialization", r.initialization}});
  }
  Json out{{"schema", kStateSchemaVersion},
           {"phase", to_string(s.phase)},
           {"observations", obs},
           {"rankings", rankings},
           {"queries_issued", s.queries_issued},
           {"x_opt_index", nullptr},
           {"pending", nullptr},
           {"preference_model", nullptr}};
  if (s.x_opt_index) out["x_opt_index"] = *s.x_opt_index;
  if (s.pending) {
    out["pending"] = {{"query", to_json(s.pending->query)},
                      {"points", points_json(s.pending->points)},
                      {"initialization", s.pending->initialization}};
  }
  if (s.preference_model) out["preference_model"] = to_json(*s.preference_model);
  if (s.gp_hyperparameters) {
    const auto& h = *s.gp_hyperparameters;
    out["gp_hyperparameters"] = {{"lengthscales", std::vector<double>(h.lengthscales.data(), h.lengthscales.data() + h.lengthscales.size())},
                                 {"signal_variance", h.signal_variance},
                                 {"noise_variance", h.noise_variance},
                                 {"full_fit_size", s.gp_full_fit_size}};
  }
  return out;
}

SessionState session_state_from_json(const Json& j) {
  if (j.value("schema", 0) != kStateSchemaVersion) {
    throw std::invalid_argument("unsupported session state schema");
  }
  SessionState s;
  s.phase = phase_from_string(j.at("phase").get<std::string>());
  for (const auto& o : j.at("observations")) s.observations.push_back(observation_from_json(o));
  for (const auto& r : j.at("rankings")) {
    s.rankings.push_back({ranking_query_from_json(r.at("query")),
                          ranking_response_from_json(r.at("response")),
                          r.value("initialization", false)});
  }
  s.queries_issued = j.at("queries_issued").get<std::size_t>();
  if (!j.at("x_opt_index").is_null()) s.x_opt_index = j["x_opt_index"].get<std::size_t>();
  if (!j.at("pending").is_null()) {
    const auto& p = j["pending"];
    PendingQuery pending{ranking_query_from_json(p.at("query")), {}, p.value("initialization", false)};
    for (const auto& pt : p.at("points")) pending.points.push_back(search_point_from_json(pt));
    s.pending = std::move(pending);
  }
  if (!j.at("preference_model").is_null()) {
    s.preference_model = preference_model_from_json(j["preference_model"]);
  }
  if (const auto it = j.find("gp_hyperparameters"); it != j.end() && !it->is_null()) {
    const auto ls = it->at("lengthscales").get<std::vector<double>>();
    GPHyperparameters h;
    h.lengthscales = Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
    h.signal_variance = it->at("signal_variance").get<double>();
    h.noise_variance = it->at("noise_variance").get<double>();
    s.gp_hyperparameters = std::move(h);
    s.gp_full_fit_size = it->at("full_fit_size").get<std::size_t>();
  }
  return s;
}

Json to_json(const SessionResult& r) {
  Json pool = Json::array();
  for (std::size_t i = 0; i < r.pool.size(); ++i) {
    const auto& e = r.pool.entries()[i];
    pool.push_back({{"rank", i},
                    {"evaluation", e.source_index},
                    {"value", e.value},
                    {"portfolio", to_json(e.portfolio)},
                    {"point", to_json(r.pool_points[e.source_index])}});
  }
  Json efficient = Json::array();
  for (const auto& p : r.efficient) efficient.push_back(to_json(p));
  return Json{{"assets", r.asset_names},
              {"x_opt", {{"point", to_json(r.x_opt)},
                         {"portfolio", to_json(r.x_opt_portfolio)},
                         {"value", r.x_opt_value}}},
              {"pool", pool},
              {"preference_model", r.model ? to_json(*r.model) : Json(nullptr)},
              {"alpha", r.alpha},
              {"inclusion_rule", to_string(r.rule)},
              {"efficient_members", r.members},
              {"efficient_portfolios", efficient},
              {"blended", to_json(r.blended)},
              {"n_observations", r.n_observations},
              {"n_rankings", r.n_rankings}};
}

Json to_json(const StrategyReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"strategy", row.strategy},
                    {"mean", row.mean},
                    {"variance", row.variance},
                    {"per_date", row.per_date}});
  }
  return Json{{"alpha", r.alpha}, {"rows", rows}};
}

}  // namespace distinctbo
