#include <cmath>

#include "doctest.h"

#include "distinctbo/errors.h"
#include "distinctbo/preference.h"
#include "sampling.h"

using namespace distinctbo;
using testing::random_portfolio;

namespace {

Portfolio p5(double a, double b, double c, double d, double e) {
  Eigen::VectorXd w(5);
  w << a, b, c, d, e;
  return Portfolio(w);
}

}  // namespace

TEST_CASE("feature map examples") {
  Rng rng(1);
  const Portfolio w = random_portfolio(rng), y = random_portfolio(rng), x = random_portfolio(rng),
                  z = random_portfolio(rng);
  CHECK(feature_map(w, w, y, y).isZero(0.0));
  CHECK(feature_map(y, z, w, x) == -feature_map(w, x, y, z));
  const Portfolio a = p5(0.4, 0.1, 0.2, 0.2, 0.1);
  const Portfolio b = p5(0.2, 0.3, 0.2, 0.2, 0.1);
  const Eigen::VectorXd phi = feature_map(a, b, y, y);
  Eigen::VectorXd expected(5);
  expected << 0.2, 0.2, 0, 0, 0;
  CHECK((phi - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("ranking_to_pairs sizes and labels") {
  Rng rng(2);
  const Portfolio ref = random_portfolio(rng);
  for (std::size_t m = 2; m <= 10; ++m) {
    std::vector<Portfolio> ranked;
    for (std::size_t i = 0; i < m; ++i) ranked.push_back(random_portfolio(rng));
    const auto pairs = ranking_to_pairs(ref, ranked);
    CHECK(pairs.size() == m * (m - 1));
    std::size_t trues = 0;
    for (const auto& s : pairs) trues += s.label ? 1 : 0;
    CHECK(trues * 2 == pairs.size());
  }
  const Portfolio x1 = random_portfolio(rng), x2 = random_portfolio(rng);
  const std::vector<Portfolio> two = {x1, x2};
  const auto pairs = ranking_to_pairs(ref, two);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].w == ref);
  CHECK(pairs[0].x == x1);
  CHECK(pairs[0].y == ref);
  CHECK(pairs[0].z == x2);
  CHECK_FALSE(pairs[0].label);
  CHECK(pairs[1].x == x2);
  CHECK(pairs[1].z == x1);
  CHECK(pairs[1].label);
  CHECK_THROWS_AS(ranking_to_pairs(ref, std::span(two).first(1)), std::invalid_argument);
}

TEST_CASE("loss gradient matches finite differences") {
  Rng rng(3);
  const auto samples = testing::simulated_samples(DistinctnessOracle::euclidean(), random_portfolio(rng), 6, 5, rng);
  Eigen::MatrixXd features(static_cast<Eigen::Index>(samples.size()), 5);
  std::vector<bool> labels;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    features.row(static_cast<Eigen::Index>(i)) = feature_map(s.w, s.x, s.y, s.z).transpose();
    labels.push_back(s.label);
  }
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd w(5);
    for (Eigen::Index k = 0; k < 5; ++k) w[k] = rng.uniform(-20, 20);
    Eigen::VectorXd grad;
    preference_loss(w, features, labels, 1e-3, &grad);
    for (Eigen::Index k = 0; k < 5; ++k) {
      const double h = 1e-5;
      Eigen::VectorXd up = w, dn = w;
      up[k] += h;
      dn[k] -= h;
      const double fd =
          (preference_loss(up, features, labels, 1e-3) - preference_loss(dn, features, labels, 1e-3)) / (2 * h);
      CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6).scale(1e-8));
    }
  }
}

TEST_CASE("fit reaches a stationary point") {
  Rng rng(4);
  const auto samples = testing::simulated_samples(DistinctnessOracle::euclidean(), random_portfolio(rng), 10, 5, rng);
  const PreferenceModel m = fit_preference(samples, 1e-3);
  Eigen::MatrixXd features(static_cast<Eigen::Index>(samples.size()), 5);
  std::vector<bool> labels;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    features.row(static_cast<Eigen::Index>(i)) = feature_map(s.w, s.x, s.y, s.z).transpose();
    labels.push_back(s.label);
  }
  Eigen::VectorXd grad;
  preference_loss(m.weights, features, labels, 1e-3, &grad);
  CHECK(grad.norm() <= 1e-8);
}

TEST_CASE("single sample is separated") {
  Rng rng(5);
  const Portfolio w = random_portfolio(rng), x = random_portfolio(rng), y = random_portfolio(rng),
                  z = random_portfolio(rng);
  const std::vector<PairwiseSample> one = {{w, x, y, z, true}};
  const PreferenceModel m = fit_preference(one);
  CHECK(predict_more_distinct(m, w, x, y, z) > 0.5);
}

TEST_CASE("duplicating the data leaves the mean-loss fit unchanged") {
  Rng rng(6);
  const auto samples = testing::simulated_samples(DistinctnessOracle::euclidean(), random_portfolio(rng), 8, 5, rng);
  auto doubled = samples;
  doubled.insert(doubled.end(), samples.begin(), samples.end());
  const PreferenceModel a = fit_preference(samples, 1e-3);
  const PreferenceModel b = fit_preference(doubled, 1e-3);
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, a.weights.cwiseAbs().maxCoeff()));
}

TEST_CASE("uninformative and invalid fits are rejected") {
  Rng rng(7);
  const Portfolio w = random_portfolio(rng), x = random_portfolio(rng);
  const std::vector<PairwiseSample> zero = {{w, x, w, x, true}, {w, w, x, x, false}};
  try {
    fit_preference(zero);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()) == "uninformative samples");
  }
  const std::vector<PairwiseSample> fine = {{w, x, w, w, true}};
  CHECK_THROWS_AS(fit_preference(fine, 0.0), std::invalid_argument);
}

TEST_CASE("predictions are antisymmetric") {
  Rng rng(8);
  PreferenceModel m;
  m.weights.resize(5);
  for (int t = 0; t < 10000; ++t) {
    for (Eigen::Index k = 0; k < 5; ++k) m.weights[k] = rng.uniform(-50, 50);
    const Portfolio w = random_portfolio(rng), x = random_portfolio(rng), y = random_portfolio(rng),
                    z = random_portfolio(rng);
    REQUIRE(predict_more_distinct(m, w, x, y, z) + predict_more_distinct(m, y, z, w, x) == 1.0);
    REQUIRE(predict_more_distinct(m, w, x, w, x) == 0.5);
  }
  for (double t : {-800.0, -40.0, -1e-3, 0.0, 1e-17, 3.0, 40.0, 800.0}) {
    const double p = antisymmetric_logistic(t);
    CHECK(p + antisymmetric_logistic(-t) == 1.0);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("euclidean rankings are learned") {
  Rng rng(9);
  const Portfolio ref = random_portfolio(rng);
  const auto oracle = DistinctnessOracle::euclidean();
  const auto samples = testing::simulated_samples(oracle, ref, 100, 5, rng);
  CHECK(samples.size() == 2000);
  const PreferenceModel m = fit_preference(samples);
  CHECK(testing::held_out_accuracy(m, oracle, ref, 1000, rng) >= 0.9);

  // Pairs whose first distance is far larger than the second.
  int confident = 0;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd far_w = Eigen::VectorXd::Constant(5, 0.01);
    far_w[static_cast<Eigen::Index>(rng.index(5))] = 0.96;
    const Portfolio far(far_w);
    Eigen::VectorXd jitter = ref.weights();
    const auto k = static_cast<Eigen::Index>(rng.index(4));
    jitter[k] += 0.001;
    jitter[k + 1] -= 0.001;
    const Portfolio close(jitter);
    confident += predict_more_distinct(m, ref, far, ref, close) > 0.9 ? 1 : 0;
  }
  CHECK(confident == 100);
}

TEST_CASE("separable data is fitted perfectly as lambda shrinks") {
  Rng rng(10);
  const Portfolio ref = random_portfolio(rng);
  // Weighted L1 distance is exactly linear in the features.
  Eigen::VectorXd truth(5);
  truth << 1.0, 2.0, 0.5, 3.0, 1.5;
  std::vector<PairwiseSample> samples;
  for (int i = 0; i < 200; ++i) {
    const Portfolio a = random_portfolio(rng), b = random_portfolio(rng);
    const double margin = truth.dot(feature_map(ref, a, ref, b));
    if (std::abs(margin) < 1e-3) continue;
    samples.push_back({ref, a, ref, b, margin > 0});
  }
  const PreferenceModel m = fit_preference(samples, 1e-9);
  std::size_t correct = 0;
  for (const auto& s : samples) correct += (predict_more_distinct(m, s.w, s.x, s.y, s.z) > 0.5) == s.label ? 1 : 0;
  CHECK(correct == samples.size());
}

TEST_CASE("ranking validation") {
  Rng rng(11);
  const RankingQuery q = testing::random_query(rng, 5, "q", random_portfolio(rng));
  const std::vector<std::size_t> good = {4, 0, 3, 1, 2};
  CHECK_NOTHROW(validate_order(q, good));
  const std::vector<std::size_t> repeat = {0, 0, 1, 2, 3};
  CHECK_THROWS_AS(validate_order(q, repeat), InvalidRankingError);
  const std::vector<std::size_t> range = {0, 1, 2, 3, 5};
  CHECK_THROWS_AS(validate_order(q, range), InvalidRankingError);
  const std::vector<std::size_t> short_order = {0, 1, 2, 3};
  CHECK_THROWS_AS(validate_order(q, short_order), InvalidRankingError);
  const auto ranked = ranked_candidates(q, good);
  CHECK(ranked[0] == q.candidates[4]);
  CHECK(ranked[4] == q.candidates[2]);
}
