#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <functional>
#include <span>

#include "curveshape/bspline.hpp"

namespace curveshape {

using Vec2 = Eigen::Vector2d;
/// Rows are planar points.
using Points = Eigen::MatrixX2d;

/// Closed planar spline curve over a periodic basis.
struct Curve {
  SplineBasis basis;
  Points controls;

  int size() const { return basis.num_controls(); }
};

/// Vector field along a base curve, expanded in the curve's basis.
struct TangentField {
  SplineBasis basis;
  Points controls;

  static TangentField zero(const SplineBasis& basis) {
    return {basis, Points::Zero(basis.num_controls(), 2)};
  }
};

/// Tensor-product spline path c(t, theta). Row i of `x` and `y` holds the
/// coordinates of the i-th time control curve.
struct Path {
  SplineBasis time_basis;
  SplineBasis space_basis;
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;

  static Path make(const SplineBasis& time_basis,
                   const SplineBasis& space_basis);

  int time_controls() const { return time_basis.num_controls(); }
  int space_controls() const { return space_basis.num_controls(); }

  Points row(int i) const;
  void set_row(int i, const Points& controls);
  Curve row_curve(int i) const { return {space_basis, row(i)}; }
  /// Curve c(t, .) obtained by contracting the time basis at t.
  Curve slice(double t) const;
};

Points evaluate(const Curve& curve, std::span<const double> thetas,
                int deriv_order);
Points evaluate(const TangentField& field, std::span<const double> thetas,
                int deriv_order);
Vec2 evaluate(const Curve& curve, double theta, int deriv_order);

/// Interpolation at the Greville abscissas of a periodic basis. The
/// collocation matrix is factored once.
class GrevilleInterpolator {
 public:
  explicit GrevilleInterpolator(const SplineBasis& basis);

  const SplineBasis& basis() const { return basis_; }
  /// Wrapped Greville abscissas in [0, 2pi).
  const std::vector<double>& sites() const { return sites_; }
  Points solve(const Points& samples) const { return lu_.solve(samples); }
  Eigen::MatrixXd solve_transpose(const Points& rhs) const {
    return lu_.transpose().solve(rhs);
  }
  Curve interpolate(const std::function<Vec2(double)>& f) const;

 private:
  SplineBasis basis_;
  std::vector<double> sites_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

Curve make_circle(const SplineBasis& basis, const Vec2& center, double radius);
Curve make_ellipse(const SplineBasis& basis, const Vec2& center, double a,
                   double b);

struct FitOptions {
  /// Minimum allowed |c_theta| relative to the mean speed l / 2pi.
  double regularity_threshold = 1e-2;
  int max_retries = 8;
  /// Polylines longer than this are downsampled first; 0 means 10 N.
  int max_points = 0;
};

/// Default penalty weight of the fitting objective
/// (1/M) sum |c(u_m) - p_m|^2 + lambda (1/2pi) int |c_thth|^2.
inline constexpr double kDefaultSmoothing = 1e-7;

/// Least-squares spline fit of a closed polyline with chord-length
/// parameters. Raises the smoothing weight until the result is regular.
Curve fit_curve(const Points& polyline, const SplineBasis& basis,
                double smoothing = kDefaultSmoothing,
                const FitOptions& options = {});

/// Least-squares fit with explicitly assigned parameters (no retries).
Curve fit_curve_at(const Points& points, std::span<const double> params,
                   const SplineBasis& basis, double smoothing);

double curve_length(const Curve& curve, const QuadratureGrid& grid);
double curve_length(const Curve& curve);

/// Minimum of |c_theta| over the grid nodes.
double check_regularity(const Curve& curve, const QuadratureGrid& grid);
double check_regularity(const Curve& curve);

/// Refit of the same geometric curve with (approximately) constant speed.
Curve constant_speed_reparam(const Curve& curve);

/// Mean of the control points.
Vec2 control_centroid(const Curve& curve);
/// Diameter of a dense sample of the curve.
double curve_diameter(const Curve& curve);

/// Samples the curve at `count` equispaced parameters.
Points sample_curve(const Curve& curve, int count);

}  // namespace curveshape
