#include <doctest.h>

#include <cmath>
#include <random>

#include "curveshape/bvp.hpp"
#include "oracle.hpp"

using namespace curveshape;

namespace {

constexpr double kTwoPi = 2.0 * oracle::kPi;

// No rotational or reflective symmetry.
Curve blob(const SplineBasis& b, double phase = 0.0) {
  GrevilleInterpolator interp(b);
  return interp.interpolate([&](double t) {
    const double u = t + phase;
    const double r = 1.0 + 0.25 * std::cos(u) + 0.15 * std::sin(2.0 * u + 0.4);
    return Vec2(r * std::cos(u), 0.7 * r * std::sin(u));
  });
}

BvpOptions small_options() {
  BvpOptions o;
  o.time_controls = 6;
  o.reparam_controls = 16;
  o.alpha_starts = 2;
  return o;
}

}  // namespace

TEST_CASE("reparametrization helpers") {
  const auto rb = SplineBasis::make(3, 8, SplineFlavor::periodic);
  Reparam rep = Reparam::identity(rb);
  CHECK(rep.psi(1.3) == doctest::Approx(1.3).epsilon(1e-14));
  CHECK(rep.min_slack() == doctest::Approx(kTwoPi / 8).epsilon(1e-12));
  rep.phi[2] = 10.0;
  CHECK_FALSE(rep.feasible());

  RigidMotion rm;
  rm.beta = oracle::kPi / 2;
  CHECK((rm.rotation() * Vec2(1.0, 0.0) - Vec2(0.0, 1.0)).norm() < 1e-15);
}

TEST_CASE("boundary transform examples") {
  const int n = 24;
  const auto b = SplineBasis::make(3, n, SplineFlavor::periodic);
  const Curve c = blob(b);
  const auto rb = SplineBasis::make(3, 8, SplineFlavor::periodic);
  double err = 1.0;
  const Curve same = apply_boundary_transform(c, Reparam::identity(rb), {}, &err);
  CHECK((same.controls - c.controls).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(err < 1e-8);

  const Curve circle = make_circle(b, Vec2::Zero(), 1.0);
  RigidMotion quarter;
  quarter.beta = oracle::kPi / 2;
  const Curve turned = apply_boundary_transform(circle, Reparam::identity(rb), quarter);
  const Points s = sample_curve(turned, 400);
  CHECK(((s.rowwise() - Eigen::RowVector2d(0.0, 1.0)).rowwise().norm().minCoeff()) < 1e-3);

  // A shift by one Greville slot moves the samples by one index.
  Reparam shift = Reparam::identity(rb);
  shift.alpha = kTwoPi / n;
  const Curve shifted = apply_boundary_transform(c, shift, {});
  const auto xi = greville_abscissas(b);
  const Points at = evaluate(c, xi, 0);
  const Points sat = evaluate(shifted, xi, 0);
  for (int i = 0; i < n; ++i) CHECK((sat.row(i) - at.row((i + n - 1) % n)).norm() < 1e-10);
}

TEST_CASE("initial paths") {
  const auto sb = SplineBasis::make(3, 16, SplineFlavor::periodic);
  const auto tb = SplineBasis::make(2, 7, SplineFlavor::clamped);
  const auto grids = PathGrids::make(tb, sb);
  const Curve c = blob(sb);
  const Path still = initial_path(c, c, InitStrategy::linear, tb);
  CHECK(path_energy(still, {}, grids).energy <= 1e-20);

  const Curve r1 = make_circle(sb, Vec2::Zero(), 1.0), r2 = make_circle(sb, Vec2::Zero(), 2.0);
  const Path grow = initial_path(r1, r2, InitStrategy::linear, tb);
  for (double t : {0.0, 0.3, 0.5, 0.9, 1.0}) {
    const Points s = sample_curve(grow.slice(t), 64);
    const Eigen::VectorXd r = s.rowwise().norm();
    CHECK(r.minCoeff() == doctest::Approx(1.0 + t).epsilon(1e-3));
    CHECK(r.maxCoeff() == doctest::Approx(1.0 + t).epsilon(1e-3));
  }

  const Curve target = blob(sb, 0.5);
  const Path via = initial_path(c, target, InitStrategy::via_circle, tb);
  const Curve circle = homotopy_circle(c, target);
  CHECK((via.row(3) - circle.controls).norm() < 1e-14);
  CHECK((via.row(0) - c.controls).norm() == 0.0);
  CHECK((via.row(6) - target.controls).norm() == 0.0);
  const Points cs = sample_curve(circle, 64);
  const Vec2 center = 0.5 * (control_centroid(c) + control_centroid(target));
  const Eigen::VectorXd rr = (cs.rowwise() - center.transpose()).rowwise().norm();
  CHECK(rr.maxCoeff() - rr.minCoeff() < 1e-3 * rr.mean());
}

TEST_CASE("procrustes recovers a rigid motion") {
  const auto sb = SplineBasis::make(3, 20, SplineFlavor::periodic);
  const Curve c = blob(sb);
  RigidMotion truth;
  truth.beta = 0.9;
  truth.v = Vec2(0.4, -1.1);
  const Points moved = (c.controls.rowwise() + truth.v.transpose()) * truth.rotation().transpose();
  const RigidMotion est = procrustes_align(moved, c.controls, true, true);
  const Points back = (moved.rowwise() + est.v.transpose()) * est.rotation().transpose();
  CHECK((back - c.controls).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("distance to itself and to a rigid copy") {
  const auto sb = SplineBasis::make(3, 16, SplineFlavor::periodic);
  const Curve c = blob(sb);
  const double diam = curve_diameter(c);
  const auto self = solve_bvp({c, c, {}, small_options()});
  CHECK(self.distance <= 1e-3 * diam);

  const double beta = oracle::kPi / 4;
  Eigen::Matrix2d rot;
  rot << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
  Curve copy = c;
  copy.controls = (c.controls * rot.transpose()).rowwise() + Eigen::RowVector2d(2.0, 0.5);
  BvpOptions o = small_options();
  o.flags.reparam = false;
  const auto r = solve_bvp({c, copy, {}, o});
  CHECK(r.distance <= 1e-3 * diam);
  CHECK(std::abs(std::remainder(r.rigid.beta + beta, kTwoPi)) < 1e-3);
}

TEST_CASE("coarse problem matches dense direct minimization") {
  const auto sb = SplineBasis::make(3, 6, SplineFlavor::periodic);
  const Curve c0 = make_circle(sb, Vec2::Zero(), 1.0);
  const Curve c1 = make_ellipse(sb, Vec2::Zero(), 2.0, 1.0);
  BvpOptions o;
  o.time_controls = 3;
  o.flags = {false, false, false};
  o.init = InitStrategy::linear;
  const auto r = solve_bvp({c0, c1, {}, o});

  // Only the middle time row is free.
  auto f = [&](const Eigen::VectorXd& z) {
    oracle::Rows rows = {c0.controls, Eigen::Map<const Points>(z.data(), 6, 2), c1.controls};
    return oracle::path_energy(rows, 2, 3, {});
  };
  std::mt19937 rng(17);
  std::normal_distribution<double> nd(0.0, 0.1);
  double best = std::numeric_limits<double>::infinity();
  for (int start = 0; start < 3; ++start) {
    Points mid = 0.5 * (c0.controls + c1.controls);
    for (Eigen::Index i = 0; i < mid.size(); ++i) mid.data()[i] += nd(rng);
    Eigen::VectorXd z = Eigen::Map<Eigen::VectorXd>(mid.data(), mid.size());
    best = std::min(best, oracle::minimize(f, z));
  }
  CHECK(r.energy == doctest::Approx(best).epsilon(1e-4));
}

TEST_CASE("solve direction barely matters") {
  const auto sb = SplineBasis::make(3, 16, SplineFlavor::periodic);
  const Curve a = blob(sb);
  const Curve b = make_ellipse(sb, Vec2(0.3, 0.1), 1.3, 0.8);
  const BvpOptions o = small_options();
  const double ab = solve_bvp({a, b, {}, o}).distance;
  const double ba = solve_bvp({b, a, {}, o}).distance;
  CHECK(std::abs(ab - ba) <= 0.02 * std::max(ab, ba));
  CHECK(geodesic_distance(a, b, {}, o, true) == doctest::Approx(0.5 * (ab + ba)).epsilon(1e-12));
}

TEST_CASE("solver rejects singular boundary curves") {
  const auto sb = SplineBasis::make(3, 8, SplineFlavor::periodic);
  const Curve point{sb, Points::Zero(8, 2)};
  const Curve c = make_circle(sb, Vec2::Zero(), 1.0);
  CHECK_THROWS_AS(solve_bvp({point, c, {}, small_options()}), Error);
}
