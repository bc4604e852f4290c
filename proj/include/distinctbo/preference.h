#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "distinctbo/portfolio.h"

namespace distinctbo {

// Coordinates on which distinctness features are computed.
enum class FeatureSpace { kSimplex, kLog };

std::string to_string(FeatureSpace space);
FeatureSpace feature_space_from_string(const std::string& name);

Eigen::VectorXd feature_coordinates(const Portfolio& p, FeatureSpace space);

// |w - x| - |y - z| elementwise. Swapping the pairs negates it exactly, so a
// zero-bias logistic model on it satisfies Pr(A > B) + Pr(B > A) = 1.
Eigen::VectorXd feature_map(const Portfolio& w, const Portfolio& x, const Portfolio& y,
                            const Portfolio& z, FeatureSpace space = FeatureSpace::kSimplex);

// One datum: label is true when d(w, x) > d(y, z).
struct PairwiseSample {
  Portfolio w, x, y, z;
  bool label;
};

// `ranked` runs from least to most distinct from `reference`. For every i < j
// emits (ref, r_i, ref, r_j, false) and (ref, r_j, ref, r_i, true), giving
// 2 * C(m, 2) samples. Throws std::invalid_argument when m < 2.
std::vector<PairwiseSample> ranking_to_pairs(const Portfolio& reference,
                                             std::span<const Portfolio> ranked);

struct PreferenceModel {
  Eigen::VectorXd weights;
  double lambda = 1e-5;
  FeatureSpace feature_space = FeatureSpace::kSimplex;
};

inline constexpr double kDefaultPreferenceLambda = 1e-5;

// Mean logistic loss plus lambda * |weights|^2 over precomputed features
// (one row per sample). Writes the gradient when non-null.
double preference_loss(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features,
                       const std::vector<bool>& labels, double lambda,
                       Eigen::VectorXd* gradient = nullptr);

// Newton's method with backtracking to gradient norm <= 1e-8. Throws
// std::invalid_argument "uninformative samples" when every feature vector is
// zero, and when lambda <= 0.
PreferenceModel fit_preference(std::span<const PairwiseSample> samples,
                               double lambda = kDefaultPreferenceLambda,
                               FeatureSpace space = FeatureSpace::kSimplex);

// Logistic function with sigma(-t) == 1 - sigma(t) exactly in floating point.
double antisymmetric_logistic(double t);

// Pr(d(w, x) > d(y, z)) under the model.
double predict_more_distinct(const PreferenceModel& model, const Portfolio& w, const Portfolio& x,
                             const Portfolio& y, const Portfolio& z);

// A ranking question: order `candidates` by distinctness from `reference`.
struct RankingQuery {
  std::string id;
  Portfolio reference;
  std::vector<Portfolio> candidates;
};

// `order` lists candidate indices from least to most distinct.
struct RankingResponse {
  std::string query_id;
  std::vector<std::size_t> order;
};

// Throws InvalidRankingError unless `order` is a permutation of 0..m-1.
void validate_order(const RankingQuery& query, std::span<const std::size_t> order);

// Candidates rearranged by `order`.
std::vector<Portfolio> ranked_candidates(const RankingQuery& query,
                                         std::span<const std::size_t> order);

}  // namespace distinctbo
