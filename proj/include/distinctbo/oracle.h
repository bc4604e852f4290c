#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "distinctbo/preference.h"

namespace distinctbo {

enum class OracleKind { kEuclidean, kWeighted, kNoisyWeighted, kDeferred };

std::string to_string(OracleKind kind);
OracleKind oracle_kind_from_string(const std::string& name);

// Answers ranking queries. Simulated kinds rank candidates by
// |profile .* (c - reference)|_2 (plus Gaussian noise * noise_scale for the
// noisy kind); the deferred kind hands the query to a human.
struct DistinctnessOracle {
  OracleKind kind = OracleKind::kEuclidean;
  Eigen::VectorXd weight_profile;  // empty means all ones
  double noise_scale = 0.0;
  std::uint64_t seed = 0;

  static DistinctnessOracle euclidean() { return {}; }
  static DistinctnessOracle weighted(Eigen::VectorXd profile);
  static DistinctnessOracle noisy_weighted(Eigen::VectorXd profile, double noise, std::uint64_t seed);
  static DistinctnessOracle deferred() { return {OracleKind::kDeferred, {}, 0.0, 0}; }

  bool simulated() const { return kind != OracleKind::kDeferred; }
  // Throws ConfigError on negative or all-zero profiles or negative noise.
  void validate() const;
};

// Default profile preferring distinctness in the last two assets (utilities,
// telecom in the bundled sector order): (eps, ..., eps, 1, 1).
Eigen::VectorXd late_assets_profile(Eigen::Index assets, double eps = 0.1);

struct Deferred {
  std::string query_id;
};

using OracleAnswer = std::variant<RankingResponse, Deferred>;

// Simulated distance the oracle ranks by (noise excluded).
double oracle_distance(const DistinctnessOracle& oracle, const Portfolio& reference,
                       const Portfolio& candidate);

// Sorts ascending by (noisy) distance, ties by candidate index. Noise draws
// depend only on (seed, query id), so answers are pure functions of the query.
OracleAnswer answer_ranking(const DistinctnessOracle& oracle, const RankingQuery& query);

}  // namespace distinctbo
