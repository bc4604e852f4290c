#pragma once

#include <vector>

#include "distinctbo/oracle.h"
#include "distinctbo/portfolio.h"
#include "distinctbo/preference.h"
#include "distinctbo/rng.h"

namespace testing {

inline distinctbo::Portfolio random_portfolio(distinctbo::Rng& rng, Eigen::Index assets = 5) {
  Eigen::VectorXd l(assets - 1);
  for (Eigen::Index i = 0; i < l.size(); ++i) l[i] = rng.uniform(-1.0, 1.0);
  return distinctbo::to_simplex(distinctbo::SearchPoint::from_log(l));
}

inline distinctbo::RankingQuery random_query(distinctbo::Rng& rng, std::size_t m, const std::string& id,
                                             const distinctbo::Portfolio& reference) {
  distinctbo::RankingQuery q{id, reference, {}};
  for (std::size_t i = 0; i < m; ++i) q.candidates.push_back(random_portfolio(rng));
  return q;
}

// Pairwise samples from `rankings` oracle-answered queries of size m.
inline std::vector<distinctbo::PairwiseSample> simulated_samples(const distinctbo::DistinctnessOracle& oracle,
                                                                 const distinctbo::Portfolio& reference,
                                                                 std::size_t rankings, std::size_t m,
                                                                 distinctbo::Rng& rng) {
  std::vector<distinctbo::PairwiseSample> out;
  for (std::size_t r = 0; r < rankings; ++r) {
    const auto q = random_query(rng, m, "q" + std::to_string(r), reference);
    const auto answer = std::get<distinctbo::RankingResponse>(distinctbo::answer_ranking(oracle, q));
    const auto ranked = distinctbo::ranked_candidates(q, answer.order);
    const auto pairs = distinctbo::ranking_to_pairs(reference, ranked);
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  return out;
}

// Fraction of fresh (reference, a) vs (reference, b) pairs the model orders
// like the true distance.
inline double held_out_accuracy(const distinctbo::PreferenceModel& model, const distinctbo::DistinctnessOracle& truth,
                                const distinctbo::Portfolio& reference, std::size_t pairs, distinctbo::Rng& rng) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto a = random_portfolio(rng);
    const auto b = random_portfolio(rng);
    const bool truth_label =
        distinctbo::oracle_distance(truth, reference, a) > distinctbo::oracle_distance(truth, reference, b);
    const bool predicted = distinctbo::predict_more_distinct(model, reference, a, reference, b) > 0.5;
    correct += truth_label == predicted ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs);
}

}  // namespace testing
