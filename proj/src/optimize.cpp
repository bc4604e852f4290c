#include "distinctbo/optimize.h"

#include <cmath>
#include <algorithm>
#include <deque>
#include <vector>

namespace distinctbo {

MinimizeResult minimize_lbfgs(const DifferentiableObjective& f, Eigen::VectorXd x0,
                              const MinimizeOptions& options) {
  MinimizeResult result;
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(n);
  double fx = f(x, g);
  if (!std::isfinite(fx)) {
    result.x = x;
    result.value = fx;
    return result;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd g_new(n), x_new(n), d(n);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    // Two-loop recursion.
    d = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(d);
      d -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += (alpha[k] - beta) * s_hist[k];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    // First step of steepest descent is scaled to unit length.
    double step = s_hist.empty() ? std::min(1.0, 1.0 / std::sqrt(-slope)) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * d;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double decrease = fx - f_new;
    x = x_new;
    g = g_new;
    const double f_old = fx;
    fx = f_new;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (decrease <= options.function_tolerance * std::max(1.0, std::abs(f_old))) {
      result.converged = true;
      break;
    }
  }
  result.x = std::move(x);
  result.value = fx;
  return result;
}

}  // namespace distinctbo
