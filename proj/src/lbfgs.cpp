#include "curveshape/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "curveshape/bspline.hpp"

namespace curveshape {

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options) {
  LbfgsResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(res.x.size());
  res.value = objective(res.x, &g);
  if (!std::isfinite(res.value))
    throw Error("optimizer started at an infeasible point");
  res.grad_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  if (res.x.size() == 0 || res.grad_norm <= options.gtol) {
    res.converged = true;
    res.status = "converged: gradient tolerance";
    return res;
  }

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  int stalled = 0;
  bool first = true;
  Eigen::VectorXd g_new(res.x.size());

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    // Two-loop recursion.
    Eigen::VectorXd d = -g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty())
      d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    if (first) step = std::min(1.0, 1.0 / d.lpNorm<Eigen::Infinity>());
    bool accepted = false;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      x_new = res.x + step * d;
      f_new = objective(x_new, &g_new);
      if (std::isfinite(f_new) &&
          f_new <= res.value + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!s_hist.empty()) {
        // Retry once along steepest descent with a fresh memory.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        first = true;
        continue;
      }
      res.status = "stopped: line search failed";
      res.converged = false;
      return res;
    }
    first = false;

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double decrease = res.value - f_new;
    res.x = x_new;
    g = g_new;
    res.value = f_new;
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    res.iterations = iter;
    const double step_norm = s.lpNorm<Eigen::Infinity>();
    res.trace.push_back({iter, f_new, res.grad_norm, step_norm});
    if (options.on_iteration) options.on_iteration(res.trace.back());

    if (res.grad_norm <= options.gtol && step_norm <= options.xtol) {
      res.converged = true;
      res.status = "converged: gradient and step tolerance";
      return res;
    }
    if (res.grad_norm <= 1e-3 * options.gtol) {
      res.converged = true;
      res.status = "converged: gradient tolerance";
      return res;
    }
    if (decrease <= options.ftol * std::max(std::abs(f_new), 1e-300)) {
      if (++stalled >= options.stall_iterations) {
        res.converged = true;
        res.status = "converged: relative decrease below tolerance";
        return res;
      }
    } else {
      stalled = 0;
    }
  }
  res.status = "stopped: iteration limit";
  return res;
}

}  // namespace curveshape
