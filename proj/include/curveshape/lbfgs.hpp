#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace curveshape {

/// Objective value at x; fills `grad` when non-null. Returns +inf outside the
/// feasible region, which the line search treats as a rejected step.
using Objective = std::function<double(const Eigen::VectorXd& x,
                                       Eigen::VectorXd* grad)>;

struct LbfgsIteration;

struct LbfgsOptions {
  int max_iter = 500;
  int memory = 10;
  double gtol = 1e-8;  // on the max-norm of the gradient
  double xtol = 1e-10; // on the max-norm of the accepted step
  double ftol = 1e-13; // relative decrease below which progress has stalled
  int stall_iterations = 5;
  int max_backtracks = 60;
  double armijo = 1e-4;
  /// Called after every accepted step; the last objective evaluation was at
  /// the accepted point.
  std::function<void(const LbfgsIteration&)> on_iteration;
};

struct LbfgsIteration {
  int iteration = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double step_norm = 0.0;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status;
  std::vector<LbfgsIteration> trace;
};

/// Limited-memory BFGS with Armijo backtracking. Accepted iterates have
/// nonincreasing objective values.
LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

}  // namespace curveshape
