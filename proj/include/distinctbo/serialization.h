#pragma once

#include <string>

#include "json.hpp"

#include "distinctbo/efficient_set.h"
#include "distinctbo/orchestrator.h"

namespace distinctbo {

using Json = nlohmann::json;

inline constexpr int kStateSchemaVersion = 1;

// Portfolios are arrays of weights.
Json to_json(const Portfolio& p);
Portfolio portfolio_from_json(const Json& j);

// {"coords": [...], "scale": "log" | "raw"}; written on the log scale.
Json to_json(const SearchPoint& p);
SearchPoint search_point_from_json(const Json& j);

// {"weights": [...], "lambda": ..., "feature_space": "simplex" | "log"}
Json to_json(const PreferenceModel& m);
PreferenceModel preference_model_from_json(const Json& j);

Json to_json(const RankingQuery& q, const std::vector<std::string>& asset_names = {});
RankingQuery ranking_query_from_json(const Json& j);
Json to_json(const RankingResponse& r);
// Throws InvalidRankingError on a malformed body.
RankingResponse ranking_response_from_json(const Json& j);

Json to_json(const DistinctnessOracle& o);
DistinctnessOracle oracle_from_json(const Json& j);

// Unknown keys are ignored so experiment configs can extend session configs.
// Throws ConfigError naming the offending field.
Json to_json(const SessionConfig& c);
SessionConfig session_config_from_json(const Json& j);

// Versioned document ("schema": 1).
Json to_json(const SessionState& s);
SessionState session_state_from_json(const Json& j);

Json to_json(const SessionResult& r);
Json to_json(const StrategyReport& r);

}  // namespace distinctbo
