#include "distinctbo/oracle.h"

#include <algorithm>
#include <numeric>

#include "distinctbo/errors.h"
#include "distinctbo/rng.h"

namespace distinctbo {

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::kEuclidean: return "euclidean";
    case OracleKind::kWeighted: return "weighted";
    case OracleKind::kNoisyWeighted: return "noisy-weighted";
    case OracleKind::kDeferred: return "deferred";
  }
  return "unknown";
}

OracleKind oracle_kind_from_string(const std::string& name) {
  if (name == "euclidean") return OracleKind::kEuclidean;
  if (name == "weighted") return OracleKind::kWeighted;
  if (name == "noisy-weighted") return OracleKind::kNoisyWeighted;
  if (name == "deferred") return OracleKind::kDeferred;
  throw ConfigError("unknown oracle kind \"" + name + "\"");
}

DistinctnessOracle DistinctnessOracle::weighted(Eigen::VectorXd profile) {
  return {OracleKind::kWeighted, std::move(profile), 0.0, 0};
}

DistinctnessOracle DistinctnessOracle::noisy_weighted(Eigen::VectorXd profile, double noise,
                                                      std::uint64_t seed) {
  return {OracleKind::kNoisyWeighted, std::move(profile), noise, seed};
}

void DistinctnessOracle::validate() const {
  if (noise_scale < 0.0) throw ConfigError("oracle noise must be non-negative");
  if (kind == OracleKind::kWeighted || kind == OracleKind::kNoisyWeighted) {
    if (weight_profile.size() > 0) {
      if (weight_profile.minCoeff() < 0.0) throw ConfigError("oracle weights must be non-negative");
      if (!(weight_profile.maxCoeff() > 0.0)) {
        throw ConfigError("oracle weights need at least one positive entry");
      }
    }
  }
}

Eigen::VectorXd late_assets_profile(Eigen::Index assets, double eps) {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(assets, eps);
  p.tail(std::min<Eigen::Index>(2, assets)).setOnes();
  return p;
}

double oracle_distance(const DistinctnessOracle& oracle, const Portfolio& reference,
                       const Portfolio& candidate) {
  const Eigen::VectorXd diff = candidate.weights() - reference.weights();
  if (oracle.kind == OracleKind::kEuclidean || oracle.weight_profile.size() == 0) return diff.norm();
  if (oracle.weight_profile.size() != diff.size()) {
    throw std::invalid_argument("oracle weight profile does not match asset count");
  }
  return oracle.weight_profile.cwiseProduct(diff).norm();
}

OracleAnswer answer_ranking(const DistinctnessOracle& oracle, const RankingQuery& query) {
  if (oracle.kind == OracleKind::kDeferred) return Deferred{query.id};
  const std::size_t m = query.candidates.size();
  std::vector<double> dist(m);
  for (std::size_t i = 0; i < m; ++i) dist[i] = oracle_distance(oracle, query.reference, query.candidates[i]);
  if (oracle.kind == OracleKind::kNoisyWeighted && oracle.noise_scale > 0.0) {
    Rng rng(derive_seed(oracle.seed, "oracle:" + query.id));
    for (auto& d : dist) d += oracle.noise_scale * rng.normal();
  }
  RankingResponse response{query.id, std::vector<std::size_t>(m)};
  std::iota(response.order.begin(), response.order.end(), std::size_t{0});
  std::stable_sort(response.order.begin(), response.order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  return response;
}

}  // namespace distinctbo
