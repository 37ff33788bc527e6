#include <doctest.h>

#include <cmath>
#include <random>

#include "curveshape/ivp.hpp"
#include "oracle.hpp"

using namespace curveshape;

namespace {

Curve blob(const SplineBasis& b) {
  GrevilleInterpolator interp(b);
  return interp.interpolate([](double t) {
    const double r = 1.0 + 0.2 * std::cos(t) + 0.1 * std::sin(2.0 * t + 0.4);
    return Vec2(r * std::cos(t), 0.8 * r * std::sin(t));
  });
}

TangentField random_field(const SplineBasis& b, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  TangentField h = TangentField::zero(b);
  for (Eigen::Index i = 0; i < h.controls.size(); ++i) h.controls.data()[i] = nd(rng);
  return h;
}

TangentField smooth_field(const SplineBasis& b) {
  GrevilleInterpolator interp(b);
  const Curve c = interp.interpolate([](double t) {
    return Vec2(0.15 * std::cos(2.0 * t), 0.1 * std::sin(3.0 * t) + 0.05);
  });
  return {b, c.controls};
}

}  // namespace

TEST_CASE("horizontal projection") {
  const auto b = SplineBasis::make(3, 24, SplineFlavor::periodic);
  const MetricParams p{1.0, 0.5, 0.3, false};
  const auto g = metric_grid(b);
  IvpOptions o;
  o.reparam_controls = 12;

  SUBCASE("radial field on the circle is horizontal") {
    const Curve c = make_circle(b, Vec2::Zero(), 1.0);
    const TangentField radial{b, c.controls};
    const TangentField r = horizontal_project(c, radial, p, o);
    CHECK((r.controls - radial.controls).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("tangent field is removed") {
    const Curve c = blob(b);
    GrevilleInterpolator interp(b);
    const auto xi = interp.sites();
    const Points d = evaluate(c, xi, 1);
    const TangentField tangent{b, interp.solve(d)};
    const TangentField r = horizontal_project(c, tangent, p, o);
    CHECK(std::sqrt(metric_norm_sq(c, r, p, g)) <= 1e-6 * std::sqrt(metric_norm_sq(c, tangent, p, g)));
  }
  SUBCASE("orthogonality, idempotence and symmetry") {
    const Curve c = blob(b);
    const TangentField h = random_field(b, 1), k = random_field(b, 2);
    const TangentField ph = horizontal_project(c, h, p, o);
    const TangentField pk = horizontal_project(c, k, p, o);
    const double scale = std::sqrt(metric_norm_sq(c, h, p, g));
    for (const auto& v : vertical_fields(c, projection_basis(b, o))) {
      const double vn = std::sqrt(metric_norm_sq(c, v, p, g));
      CHECK(std::abs(metric_inner(c, ph, v, p, g)) <= 1e-10 * scale * vn);
    }
    const TangentField pph = horizontal_project(c, ph, p, o);
    CHECK((pph.controls - ph.controls).norm() <= 1e-10 * ph.controls.norm());
    const double a = metric_inner(c, ph, k, p, g), bb = metric_inner(c, h, pk, p, g);
    CHECK(std::abs(a - bb) <= 1e-10 * scale * std::sqrt(metric_norm_sq(c, k, p, g)));
  }
}

TEST_CASE("shooting with zero velocity stays put") {
  const auto b = SplineBasis::make(3, 16, SplineFlavor::periodic);
  const Curve c = blob(b);
  const auto geo = discrete_exp(c, TangentField::zero(b), 5, {});
  REQUIRE(geo.curves.size() == 6);
  for (const auto& ck : geo.curves) CHECK((ck.controls - c.controls).norm() == 0.0);
  CHECK_THROWS_AS(discrete_exp(c, TangentField::zero(b), 0, {}), Error);
}

TEST_CASE("discrete exponential properties") {
  const auto b = SplineBasis::make(3, 16, SplineFlavor::periodic);
  const MetricParams p;
  const Curve c = blob(b);
  IvpOptions o;
  o.reparam_controls = 16;
  const TangentField h = horizontal_project(c, smooth_field(b), p, o);
  const auto g = metric_grid(b);

  const auto geo = discrete_exp(c, h, 10, p, o);
  CHECK((geo.curves[1].controls - (c.controls + h.controls / 10.0)).norm() < 1e-14);
  // Per-segment energies are nearly constant.
  std::vector<double> w;
  for (int k = 0; k < 10; ++k) {
    const TangentField d{b, geo.curves[k + 1].controls - geo.curves[k].controls};
    w.push_back(metric_norm_sq(geo.curves[k], d, p, g));
  }
  double mean = 0.0;
  for (double v : w) mean += v / w.size();
  for (double v : w) CHECK(std::abs(v - mean) <= 0.05 * mean);

  // Doubling K halves the endpoint error.
  const Curve e10 = geo.endpoint();
  const Curve e20 = discrete_exp(c, h, 20, p, o).endpoint();
  const Curve e40 = discrete_exp(c, h, 40, p, o).endpoint();
  const TangentField d1{b, e10.controls - e20.controls}, d2{b, e20.controls - e40.controls};
  const double ratio = std::sqrt(metric_norm_sq(e40, d1, p, g) / metric_norm_sq(e40, d2, p, g));
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 3.0);
}

TEST_CASE("path initial velocity") {
  const auto sb = SplineBasis::make(3, 12, SplineFlavor::periodic);
  const auto tb = SplineBasis::make(2, 5, SplineFlavor::clamped);
  const Curve r1 = make_circle(sb, Vec2::Zero(), 1.0), r2 = make_circle(sb, Vec2::Zero(), 2.0);
  const Path path = initial_path(r1, r2, InitStrategy::linear, tb);
  const TangentField v = path_initial_velocity(path);
  CHECK((v.controls - (r2.controls - r1.controls)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("log map") {
  const auto b = SplineBasis::make(3, 16, SplineFlavor::periodic);
  const MetricParams p;
  const auto g = metric_grid(b);
  BvpOptions bo;
  bo.time_controls = 6;
  bo.reparam_controls = 16;
  bo.alpha_starts = 2;
  IvpOptions io;
  io.reparam_controls = 16;
  const Curve c = blob(b);
  const double diam = curve_diameter(c);

  const auto self = riemannian_log(c, c, p, bo, io);
  CHECK(std::sqrt(metric_norm_sq(c, self.velocity, p, g)) <= 1e-3 * diam);

  // Rotated, translated and cyclically shifted copy of the same shape.
  GrevilleInterpolator interp(b);
  const Curve copy = interp.interpolate([&](double t) {
    const Vec2 q = evaluate(c, wrap_angle(t + 2.0 * oracle::kPi / 16), 0);
    return Vec2(std::cos(0.5) * q.x() - std::sin(0.5) * q.y() + 1.0,
                std::sin(0.5) * q.x() + std::cos(0.5) * q.y() - 0.5);
  });
  const auto quot = riemannian_log(c, copy, p, bo, io);
  CHECK(std::sqrt(metric_norm_sq(c, quot.velocity, p, g)) <= 1e-3 * diam);

  const Curve e = make_ellipse(b, Vec2(0.2, 0.0), 1.4, 0.8);
  const auto lg = riemannian_log(c, e, p, bo, io);
  const double norm = std::sqrt(metric_norm_sq(c, lg.velocity, p, g));
  CHECK(norm == doctest::Approx(lg.geodesic.distance).epsilon(0.05));
}
