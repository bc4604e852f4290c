#include "distinctbo/preference.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "distinctbo/errors.h"

namespace distinctbo {

std::string to_string(FeatureSpace space) {
  return space == FeatureSpace::kSimplex ? "simplex" : "log";
}

FeatureSpace feature_space_from_string(const std::string& name) {
  if (name == "simplex") return FeatureSpace::kSimplex;
  if (name == "log") return FeatureSpace::kLog;
  throw ConfigError("feature_space must be \"simplex\" or \"log\"");
}

Eigen::VectorXd feature_coordinates(const Portfolio& p, FeatureSpace space) {
  if (space == FeatureSpace::kSimplex) return p.weights();
  return from_simplex(p).log_coords();
}

Eigen::VectorXd feature_map(const Portfolio& w, const Portfolio& x, const Portfolio& y,
                            const Portfolio& z, FeatureSpace space) {
  if (w.size() != x.size() || y.size() != z.size() || w.size() != y.size()) {
    throw std::invalid_argument("feature_map dimension mismatch");
  }
  const Eigen::VectorXd a = (feature_coordinates(w, space) - feature_coordinates(x, space)).cwiseAbs();
  const Eigen::VectorXd b = (feature_coordinates(y, space) - feature_coordinates(z, space)).cwiseAbs();
  return a - b;
}

std::vector<PairwiseSample> ranking_to_pairs(const Portfolio& reference,
                                             std::span<const Portfolio> ranked) {
  if (ranked.size() < 2) throw std::invalid_argument("ranking needs at least 2 portfolios");
  std::vector<PairwiseSample> out;
  out.reserve(ranked.size() * (ranked.size() - 1));
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    for (std::size_t j = i + 1; j < ranked.size(); ++j) {
      out.push_back({reference, ranked[i], reference, ranked[j], false});
      out.push_back({reference, ranked[j], reference, ranked[i], true});
    }
  }
  return out;
}

double antisymmetric_logistic(double t) {
  if (t < 0.0) return 1.0 - antisymmetric_logistic(-t);
  // Largest double below 1 keeps the result inside (0, 1); 1 - q stays exact.
  constexpr double kBelowOne = 1.0 - 0x1.0p-53;
  const double q = 1.0 / (1.0 + std::exp(-t));
  return std::min(q, kBelowOne);
}

double preference_loss(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features,
                       const std::vector<bool>& labels, double lambda, Eigen::VectorXd* gradient) {
  const Eigen::VectorXd t = features * weights;
  const auto n = static_cast<double>(features.rows());
  double loss = 0.0;
  if (gradient != nullptr) *gradient = 2.0 * lambda * weights;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double s = labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    const double margin = s * t[i];
    // log(1 + exp(-margin)), stable for both signs.
    loss += margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    if (gradient != nullptr) {
      *gradient -= (s * (1.0 - antisymmetric_logistic(margin)) / n) * features.row(i).transpose();
    }
  }
  return loss / n + lambda * weights.squaredNorm();
}

PreferenceModel fit_preference(std::span<const PairwiseSample> samples, double lambda,
                               FeatureSpace space) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (samples.empty()) throw std::invalid_argument("uninformative samples");
  const Eigen::Index dim = feature_coordinates(samples.front().w, space).size();
  Eigen::MatrixXd features(static_cast<Eigen::Index>(samples.size()), dim);
  std::vector<bool> labels(samples.size());
  bool informative = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const Eigen::VectorXd phi = feature_map(s.w, s.x, s.y, s.z, space);
    features.row(static_cast<Eigen::Index>(i)) = phi.transpose();
    labels[i] = s.label;
    informative = informative || phi.cwiseAbs().maxCoeff() > 0.0;
  }
  if (!informative) throw std::invalid_argument("uninformative samples");

  const auto n = static_cast<double>(samples.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd grad;
  double loss = preference_loss(w, features, labels, lambda, &grad);
  for (int iter = 0; iter < 200 && grad.norm() > 1e-8; ++iter) {
    const Eigen::VectorXd t = features * w;
    Eigen::MatrixXd hessian = 2.0 * lambda * Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd curvature(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double p = antisymmetric_logistic(t[i]);
      curvature[i] = p * (1.0 - p) / n;
    }
    hessian.noalias() += features.transpose() * curvature.asDiagonal() * features;
    const Eigen::VectorXd step = hessian.llt().solve(-grad);
    double scale = 1.0;
    Eigen::VectorXd next_grad;
    double next_loss = loss;
    Eigen::VectorXd trial = w;
    for (int ls = 0; ls < 50; ++ls) {
      trial = w + scale * step;
      next_loss = preference_loss(trial, features, labels, lambda, &next_grad);
      if (next_loss <= loss + 1e-4 * scale * grad.dot(step)) break;
      scale *= 0.5;
    }
    // Inside round-off the Armijo test can fail even at the optimum.
    if (next_loss > loss && next_grad.norm() >= grad.norm()) break;
    w = trial;
    loss = next_loss;
    grad = next_grad;
  }
  return {w, lambda, space};
}

double predict_more_distinct(const PreferenceModel& model, const Portfolio& w, const Portfolio& x,
                             const Portfolio& y, const Portfolio& z) {
  const Eigen::VectorXd phi = feature_map(w, x, y, z, model.feature_space);
  if (phi.size() != model.weights.size()) throw std::invalid_argument("model dimension mismatch");
  return antisymmetric_logistic(model.weights.dot(phi));
}

void validate_order(const RankingQuery& query, std::span<const std::size_t> order) {
  const std::size_t m = query.candidates.size();
  if (order.size() != m) {
    throw InvalidRankingError("ranking must list all " + std::to_string(m) + " candidates");
  }
  std::vector<bool> seen(m, false);
  for (const std::size_t idx : order) {
    if (idx >= m) throw InvalidRankingError("ranking index out of range");
    if (seen[idx]) throw InvalidRankingError("ranking repeats candidate index " + std::to_string(idx));
    seen[idx] = true;
  }
}

std::vector<Portfolio> ranked_candidates(const RankingQuery& query,
                                         std::span<const std::size_t> order) {
  validate_order(query, order);
  std::vector<Portfolio> out;
  out.reserve(order.size());
  for (const std::size_t idx : order) out.push_back(query.candidates[idx]);
  return out;
}

}  // namespace distinctbo
