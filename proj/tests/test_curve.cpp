#include <doctest.h>

#include <cmath>
#include <random>

#include "curveshape/curve.hpp"
#include "oracle.hpp"

using namespace curveshape;

namespace {

constexpr double kTwoPi = 2.0 * oracle::kPi;

Points circle_points(int m, double r, double phase = 0.0) {
  Points p(m, 2);
  for (int i = 0; i < m; ++i) {
    const double t = phase + kTwoPi * i / m;
    p.row(i) << r * std::cos(t), r * std::sin(t);
  }
  return p;
}

double speed_cv(const Curve& c) {
  const auto g = quadrature_grid(c.basis, default_quadrature_order(c.basis));
  const Points d = evaluate(c, g.nodes, 1);
  const Eigen::VectorXd s = d.rowwise().norm();
  const double mean = s.mean();
  return std::sqrt((s.array() - mean).square().mean()) / mean;
}

}  // namespace

TEST_CASE("evaluation of constant curves") {
  const auto b = SplineBasis::make(3, 10, SplineFlavor::periodic);
  Curve c{b, Points::Zero(10, 2)};
  c.controls.col(0).setConstant(2.5);
  c.controls.col(1).setConstant(-1.0);
  const std::vector<double> th = {0.0, 1.0, 3.3, 6.0};
  const Points v = evaluate(c, th, 0);
  const Points d = evaluate(c, th, 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    CHECK(v(i, 0) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(v(i, 1) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(d(i, 0)) + std::abs(d(i, 1)) <= 1e-12);
  }
  CHECK(check_regularity(c) == 0.0);
}

TEST_CASE("circle fit") {
  const auto b = SplineBasis::make(3, 60, SplineFlavor::periodic);
  const Curve c = fit_curve(circle_points(600, 1.0), b, 0.0);
  const auto s = sample_curve(c, 997);
  const double dev = (s.rowwise().norm().array() - 1.0).abs().maxCoeff();
  CHECK(dev < 1e-3);
  const Vec2 p0 = evaluate(c, 0.0, 0);
  CHECK(p0.x() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(p0.y()) < 1e-3);
  CHECK(curve_length(c) == doctest::Approx(kTwoPi).epsilon(1e-6));
  CHECK(check_regularity(c) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("spline members are reproduced") {
  const int n = 16;
  const auto b = SplineBasis::make(3, n, SplineFlavor::periodic);
  std::mt19937 rng(4);
  std::normal_distribution<double> nd(0.0, 0.05);
  // Perturbed circle so that chord-length parameters are non-uniform.
  Curve ref = make_circle(b, Vec2(0.3, -0.2), 1.0);
  for (Eigen::Index i = 0; i < ref.controls.rows(); ++i) {
    ref.controls(i, 0) += nd(rng);
    ref.controls(i, 1) += nd(rng);
  }
  std::vector<double> u;
  for (int i = 0; i < 5 * n; ++i) u.push_back(kTwoPi * (i + 0.37 * std::sin(i)) / (5 * n));
  const Points pts = evaluate(ref, u, 0);
  const Curve fit = fit_curve_at(pts, u, b, 0.0);
  CHECK((fit.controls - ref.controls).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fit rejects degenerate polylines") {
  const auto b = SplineBasis::make(3, 12, SplineFlavor::periodic);
  Points p(3, 2);
  p << 1, 1, 1, 1, 1, 1;
  CHECK_THROWS_AS(fit_curve(p, b), Error);
}

TEST_CASE("length homogeneity and square perimeter") {
  const auto b = SplineBasis::make(3, 60, SplineFlavor::periodic);
  const Curve c = make_ellipse(b, Vec2(1.0, 2.0), 1.5, 0.5);
  Curve scaled = c;
  scaled.controls *= 3.0;
  CHECK(curve_length(scaled) == doctest::Approx(3.0 * curve_length(c)).epsilon(1e-13));

  Points sq(400, 2);
  for (int i = 0; i < 400; ++i) {
    const double s = (i % 100) / 100.0 * 2.0 - 1.0;
    switch (i / 100) {
      case 0: sq.row(i) << s, -1.0; break;
      case 1: sq.row(i) << 1.0, s; break;
      case 2: sq.row(i) << -s, 1.0; break;
      default: sq.row(i) << -1.0, -s; break;
    }
  }
  const Curve fit = fit_curve(sq, b);
  CHECK(curve_length(fit) == doctest::Approx(8.0).epsilon(0.02));
  CHECK(check_regularity(fit) > 0.0);
}

TEST_CASE("circle via interpolation is nearly exact") {
  const auto b = SplineBasis::make(3, 60, SplineFlavor::periodic);
  const Curve c = make_circle(b, Vec2::Zero(), 1.0);
  CHECK(curve_length(c) == doctest::Approx(kTwoPi).epsilon(1e-6));
  CHECK(curve_diameter(c) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(control_centroid(c).norm() < 1e-12);
}

TEST_CASE("constant speed reparametrization") {
  const auto b = SplineBasis::make(3, 60, SplineFlavor::periodic);
  SUBCASE("circle is a fixed point") {
    const Curve c = make_circle(b, Vec2::Zero(), 1.0);
    const Curve r = constant_speed_reparam(c);
    CHECK((r.controls - c.controls).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("ellipse becomes uniform") {
    // Parametrized by angle around the center, which is far from uniform.
    GrevilleInterpolator interp(b);
    const Curve c = interp.interpolate([](double t) {
      const double r = 1.0 / std::sqrt(std::pow(std::cos(t), 2) + 4.0 * std::pow(std::sin(t), 2));
      return Vec2(2.0 * r * std::cos(t), 2.0 * r * std::sin(t));
    });
    CHECK(speed_cv(c) > 0.1);
    const Curve r = constant_speed_reparam(c);
    CHECK(speed_cv(r) < 0.02);
    CHECK(curve_length(r) == doctest::Approx(curve_length(c)).epsilon(5e-3));
  }
}

TEST_CASE("path rows and slices") {
  const auto tb = SplineBasis::make(2, 4, SplineFlavor::clamped);
  const auto sb = SplineBasis::make(3, 12, SplineFlavor::periodic);
  Path p = Path::make(tb, sb);
  const Curve a = make_circle(sb, Vec2::Zero(), 1.0);
  const Curve b = make_circle(sb, Vec2::Zero(), 2.0);
  for (int i = 0; i < 4; ++i) {
    const double w = greville_abscissas(tb)[i];
    p.set_row(i, (1.0 - w) * a.controls + w * b.controls);
  }
  CHECK((p.row(2) - ((1.0 - 0.75) * a.controls + 0.75 * b.controls)).norm() < 1e-14);
  CHECK((p.slice(0.0).controls - a.controls).norm() < 1e-14);
  CHECK((p.slice(1.0).controls - b.controls).norm() < 1e-14);
  CHECK((p.slice(0.4).controls - 1.4 * a.controls).norm() < 1e-12);
}
