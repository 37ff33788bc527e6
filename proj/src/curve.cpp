#include "curveshape/curve.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace curveshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename Spline>
Points evaluate_spline(const Spline& s, std::span<const double> thetas,
                       int deriv_order) {
  const int p = s.basis.degree();
  Points out(static_cast<Eigen::Index>(thetas.size()), 2);
  std::vector<int> idx(static_cast<std::size_t>(p + 1));
  Eigen::MatrixXd ders(deriv_order + 1, p + 1);
  for (std::size_t m = 0; m < thetas.size(); ++m) {
    s.basis.evaluate_into(thetas[m], deriv_order, idx, ders);
    Vec2 v = Vec2::Zero();
    for (int r = 0; r <= p; ++r)
      v += ders(deriv_order, r) * s.controls.row(idx[r]).transpose();
    out.row(static_cast<Eigen::Index>(m)) = v.transpose();
  }
  return out;
}

std::vector<double> uniform_params(int count) {
  std::vector<double> u(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) u[m] = kTwoPi * m / count;
  return u;
}

}  // namespace

Path Path::make(const SplineBasis& time_basis, const SplineBasis& space_basis) {
  if (time_basis.periodic() || !space_basis.periodic())
    throw Error("a path needs a clamped time basis and a periodic space basis");
  return {time_basis, space_basis,
          Eigen::MatrixXd::Zero(time_basis.num_controls(),
                                space_basis.num_controls()),
          Eigen::MatrixXd::Zero(time_basis.num_controls(),
                                space_basis.num_controls())};
}

Points Path::row(int i) const {
  Points out(space_controls(), 2);
  out.col(0) = x.row(i).transpose();
  out.col(1) = y.row(i).transpose();
  return out;
}

void Path::set_row(int i, const Points& controls) {
  x.row(i) = controls.col(0).transpose();
  y.row(i) = controls.col(1).transpose();
}

Curve Path::slice(double t) const {
  const auto local = time_basis.evaluate(t, 0);
  Points out = Points::Zero(space_controls(), 2);
  for (std::size_t r = 0; r < local.indices.size(); ++r) {
    const double w = local.ders(0, static_cast<Eigen::Index>(r));
    out.col(0) += w * x.row(local.indices[r]).transpose();
    out.col(1) += w * y.row(local.indices[r]).transpose();
  }
  return {space_basis, out};
}

Points evaluate(const Curve& curve, std::span<const double> thetas,
                int deriv_order) {
  return evaluate_spline(curve, thetas, deriv_order);
}

Points evaluate(const TangentField& field, std::span<const double> thetas,
                int deriv_order) {
  return evaluate_spline(field, thetas, deriv_order);
}

Vec2 evaluate(const Curve& curve, double theta, int deriv_order) {
  const double t[1] = {theta};
  return evaluate_spline(curve, t, deriv_order).row(0).transpose();
}

GrevilleInterpolator::GrevilleInterpolator(const SplineBasis& basis)
    : basis_(basis) {
  if (!basis.periodic())
    throw Error("Greville interpolation is only used for periodic bases");
  for (double xi : greville_abscissas(basis)) sites_.push_back(wrap_angle(xi));
  lu_.compute(Eigen::MatrixXd(collocation_matrix(basis, sites_, 0)));
}

Curve GrevilleInterpolator::interpolate(
    const std::function<Vec2(double)>& f) const {
  Points samples(basis_.num_controls(), 2);
  for (int k = 0; k < basis_.num_controls(); ++k)
    samples.row(k) = f(sites_[k]).transpose();
  return {basis_, solve(samples)};
}

Curve make_circle(const SplineBasis& basis, const Vec2& center,
                  double radius) {
  return make_ellipse(basis, center, radius, radius);
}

Curve make_ellipse(const SplineBasis& basis, const Vec2& center, double a,
                   double b) {
  return GrevilleInterpolator(basis).interpolate([&](double th) {
    return Vec2(center.x() + a * std::cos(th), center.y() + b * std::sin(th));
  });
}

Curve fit_curve_at(const Points& points, std::span<const double> params,
                   const SplineBasis& basis, double smoothing) {
  if (!basis.periodic()) throw Error("curves need a periodic basis");
  if (smoothing < 0.0) throw Error("smoothing weight must be nonnegative");
  const SparseMatrix a = collocation_matrix(basis, params, 0);
  const double m = static_cast<double>(points.rows());
  Eigen::MatrixXd normal = Eigen::MatrixXd(a.transpose() * a) / m;
  Points rhs = (a.transpose() * points) / m;
  if (smoothing > 0.0) {
    const auto quad = GridCollocation::make(basis, 2);
    const SparseMatrix& c2 = quad[2];
    normal += smoothing / kTwoPi *
              Eigen::MatrixXd(c2.transpose() * quad.weights.asDiagonal() * c2);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const double diag_max = normal.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-13 * diag_max)
    throw Error("degenerate polyline: fitting system is singular");
  return {basis, ldlt.solve(rhs)};
}

namespace {

// Equispaced points by arc length along the closed polyline.
Points resample_closed(const Points& poly, int count) {
  const Eigen::Index m = poly.rows();
  std::vector<double> cum(static_cast<std::size_t>(m) + 1, 0.0);
  for (Eigen::Index k = 0; k < m; ++k)
    cum[k + 1] = cum[k] + (poly.row((k + 1) % m) - poly.row(k)).norm();
  const double total = cum.back();
  if (!(total > 0.0)) throw Error("degenerate polyline: zero length");
  Points out(count, 2);
  Eigen::Index seg = 0;
  for (int i = 0; i < count; ++i) {
    const double s = total * i / count;
    while (cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double w = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    out.row(i) = (1.0 - w) * poly.row(seg) + w * poly.row((seg + 1) % m);
  }
  return out;
}

}  // namespace

Curve fit_curve(const Points& polyline, const SplineBasis& basis,
                double smoothing, const FitOptions& options) {
  const int n = basis.num_controls();
  if (polyline.rows() < 3)
    throw Error("degenerate polyline: needs at least 3 points");
  const int cap = options.max_points > 0 ? options.max_points : 10 * n;
  Points pts = polyline;
  if (pts.rows() < 4 * n) pts = resample_closed(pts, cap);
  if (pts.rows() > cap) {
    const Eigen::Index stride = (pts.rows() + cap - 1) / cap;
    const Eigen::Index kept = (pts.rows() + stride - 1) / stride;
    Points sub(kept, 2);
    for (Eigen::Index k = 0; k < kept; ++k) sub.row(k) = pts.row(k * stride);
    pts = sub;
  }
  const Eigen::Index m = pts.rows();
  std::vector<double> cum(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index k = 1; k < m; ++k)
    cum[k] = cum[k - 1] + (pts.row(k) - pts.row(k - 1)).norm();
  const double total = cum.back() + (pts.row(0) - pts.row(m - 1)).norm();
  if (!(total > 0.0)) throw Error("degenerate polyline: all points coincide");
  std::vector<double> params(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) params[k] = kTwoPi * cum[k] / total;

  const auto grid = quadrature_grid(basis, 2 * default_quadrature_order(basis));
  double lambda = smoothing;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    Curve c = fit_curve_at(pts, params, basis, lambda);
    const double len = curve_length(c, grid);
    if (len > 0.0 &&
        check_regularity(c, grid) >=
            options.regularity_threshold * len / kTwoPi)
      return c;
    lambda = std::max(10.0 * lambda, 1e-6);
  }
  throw Error("fit failed: could not obtain a regular curve after " +
              std::to_string(options.max_retries) + " retries");
}

double curve_length(const Curve& curve, const QuadratureGrid& grid) {
  const Points d = evaluate(curve, grid.nodes, 1);
  double len = 0.0;
  for (Eigen::Index q = 0; q < d.rows(); ++q)
    len += grid.weights[q] * d.row(q).norm();
  return len;
}

double curve_length(const Curve& curve) {
  return curve_length(
      curve, quadrature_grid(curve.basis, 2 * default_quadrature_order(curve.basis)));
}

double check_regularity(const Curve& curve, const QuadratureGrid& grid) {
  return evaluate(curve, grid.nodes, 1).rowwise().norm().minCoeff();
}

double check_regularity(const Curve& curve) {
  return check_regularity(
      curve, quadrature_grid(curve.basis, default_quadrature_order(curve.basis)));
}

Curve constant_speed_reparam(const Curve& curve) {
  const int samples = 20 * curve.size();
  const auto thetas = uniform_params(samples);
  const Points pts = evaluate(curve, thetas, 0);

  std::vector<double> gx, gw;
  gauss_legendre(8, gx, gw);
  const double h = kTwoPi / samples;
  std::vector<double> cum(static_cast<std::size_t>(samples + 1), 0.0);
  std::vector<double> nodes(gx.size());
  for (int m = 0; m < samples; ++m) {
    for (std::size_t q = 0; q < gx.size(); ++q)
      nodes[q] = thetas[m] + 0.5 * h * (gx[q] + 1.0);
    const Points d = evaluate(curve, nodes, 1);
    double seg = 0.0;
    for (std::size_t q = 0; q < gx.size(); ++q)
      seg += 0.5 * h * gw[q] * d.row(static_cast<Eigen::Index>(q)).norm();
    cum[m + 1] = cum[m] + seg;
  }
  const double total = cum.back();
  if (!(total > 0.0)) throw Error("cannot reparametrize a constant curve");
  std::vector<double> params(static_cast<std::size_t>(samples));
  for (int m = 0; m < samples; ++m) params[m] = kTwoPi * cum[m] / total;
  return fit_curve_at(pts, params, curve.basis, 0.0);
}

Vec2 control_centroid(const Curve& curve) {
  return curve.controls.colwise().mean().transpose();
}

Points sample_curve(const Curve& curve, int count) {
  return evaluate(curve, uniform_params(count), 0);
}

double curve_diameter(const Curve& curve) {
  const Points s = sample_curve(curve, 8 * curve.size());
  double d = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = i + 1; j < s.rows(); ++j)
      d = std::max(d, (s.row(i) - s.row(j)).norm());
  return d;
}

}  // namespace curveshape
