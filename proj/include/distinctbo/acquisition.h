#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "distinctbo/gp.h"
#include "distinctbo/portfolio.h"
#include "distinctbo/rng.h"

namespace distinctbo {

// Expected improvement for maximization: sigma (z Phi(z) + phi(z)) with
// z = (mean - best) / sigma, and max(mean - best, 0) once sigma < 1e-12.
double expected_improvement(double mean, double variance, double best);
double expected_improvement(const GPModel& model, const SearchPoint& point, double best);

struct AcquisitionOptions {
  std::size_t n_candidates = 2048;
  std::size_t n_polish_starts = 8;
  int polish_iterations = 100;
  double initial_step = 0.5;  // log units
  double min_step = 1e-5;
  double min_separation = 1e-6;  // L-infinity, log units
};

struct AcquisitionResult {
  SearchPoint point;
  double ei_value;
  std::size_t evaluations = 0;
};

// Maximizes EI against the model's best observed value over the log box:
// randomly shifted Halton candidates, then compass-search polish from the
// best few. Points closer than min_separation to any excluded point are
// ineligible. Throws std::runtime_error when every candidate is excluded.
AcquisitionResult maximize_acquisition(const GPModel& model, std::span<const SearchPoint> exclude,
                                       Rng& rng, const AcquisitionOptions& options = {});

// Constant-liar (max) batch: repeatedly maximize EI and condition a copy of
// the model on the proposed point with value = best observed target. The
// input model is not modified.
std::vector<SearchPoint> constant_liar_batch(const GPModel& model, std::size_t m,
                                             std::span<const SearchPoint> exclude, Rng& rng,
                                             const AcquisitionOptions& options = {});

// n-point Latin hypercube over the log box.
std::vector<SearchPoint> latin_hypercube(std::size_t n, Eigen::Index dim, Rng& rng);

// First n points of a Halton sequence in [0,1)^dim with a random
// Cranley-Patterson shift (columns are points).
Eigen::MatrixXd shifted_halton(std::size_t n, Eigen::Index dim, Rng& rng);

}  // namespace distinctbo
