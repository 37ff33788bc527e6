#include <doctest.h>

#include <cmath>
#include <Eigen/Cholesky>
#include <limits>

#include "curveshape/lbfgs.hpp"

using namespace curveshape;

TEST_CASE("quadratic is minimized") {
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::Vector3d b(1, -2, 3);
  auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) *g = a * x - b;
    return 0.5 * x.dot(a * x) - b.dot(x);
  };
  const auto r = minimize_lbfgs(f, Eigen::VectorXd::Zero(3));
  CHECK(r.converged);
  const Eigen::VectorXd exact = a.ldlt().solve(b);
  CHECK((r.x - exact).norm() < 1e-7);
}

TEST_CASE("rosenbrock with a monotone trace") {
  auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    if (g) {
      g->resize(2);
      (*g)[0] = -2.0 * a - 400.0 * x[0] * b;
      (*g)[1] = 200.0 * b;
    }
    return a * a + 100.0 * b * b;
  };
  LbfgsOptions o;
  o.max_iter = 2000;
  int calls = 0;
  o.on_iteration = [&](const LbfgsIteration&) { ++calls; };
  const auto r = minimize_lbfgs(f, Eigen::Vector2d(-1.2, 1.0), o);
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 1.0) < 1e-5);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-5);
  CHECK(calls == r.iterations);
  REQUIRE(!r.trace.empty());
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].value <= r.trace[k - 1].value);
}

TEST_CASE("infeasible trial points are rejected") {
  // Minimum of x - log(x) at x = 1; the domain is x > 0.
  auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (x[0] <= 0.0) return std::numeric_limits<double>::infinity();
    if (g) *g = Eigen::VectorXd::Constant(1, 1.0 - 1.0 / x[0]);
    return x[0] - std::log(x[0]);
  };
  const auto r = minimize_lbfgs(f, Eigen::VectorXd::Constant(1, 20.0));
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("iteration cap") {
  auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) *g = 2.0 * x;
    return x.squaredNorm();
  };
  LbfgsOptions o;
  o.max_iter = 0;
  const auto r = minimize_lbfgs(f, Eigen::VectorXd::Ones(4), o);
  CHECK_FALSE(r.converged);
  CHECK(r.value == doctest::Approx(4.0));
}
