#pragma once

#include <functional>

#include <Eigen/Core>

namespace distinctbo {

// f(x) returning the value and writing the gradient into `grad`.
using DifferentiableObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct MinimizeOptions {
  int max_iterations = 100;
  int history = 8;
  double gradient_tolerance = 1e-6;
  double function_tolerance = 1e-10;  // relative decrease
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Unconstrained limited-memory BFGS with a backtracking Armijo line search.
// Non-finite trial values are treated as failed steps.
MinimizeResult minimize_lbfgs(const DifferentiableObjective& f, Eigen::VectorXd x0,
                              const MinimizeOptions& options = {});

}  // namespace distinctbo
