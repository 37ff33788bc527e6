#pragma once

#include <vector>

#include "curveshape/bvp.hpp"

namespace curveshape {

struct IvpOptions {
  /// Basis of the reparametrization fields m used for the vertical space.
  int reparam_degree = 3;
  int reparam_controls = 20;
  /// Relative tolerance on the dual G-norm of the stationarity residual.
  double tol = 1e-9;
  int max_newton = 50;
  int quad_order = 0;
};

/// Removes the vertical part of h: h - sum_i m_i V_i with V_i the spline
/// interpolant of D_i c_theta and m solving the Gram system of the V_i. The
/// result is G_c-orthogonal to every V_i.
TangentField horizontal_project(const Curve& curve, const TangentField& h,
                                const MetricParams& params,
                                const SplineBasis& reparam_basis,
                                const GridCollocation& grid);
TangentField horizontal_project(const Curve& curve, const TangentField& h,
                                const MetricParams& params,
                                const IvpOptions& options = {});

/// Spline interpolants of D_i c_theta spanning the vertical directions.
std::vector<TangentField> vertical_fields(const Curve& curve,
                                          const SplineBasis& reparam_basis);

struct DiscreteGeodesic {
  std::vector<Curve> curves;  // c_0 .. c_K
  int steps = 0;
  MetricParams params;

  const Curve& endpoint() const { return curves.back(); }
};

/// Discrete geodesic shooting with W(a, b) = G_a(b - a, b - a): c_1 = c_0 +
/// h / K and each c_{k+1} makes c_k stationary for W(c_{k-1}, c_k) +
/// W(c_k, c_{k+1}).
DiscreteGeodesic discrete_exp(const Curve& c0, const TangentField& h, int steps,
                              const MetricParams& params,
                              const IvpOptions& options = {});

/// Time derivative c_t(0, .) of a spline path.
TangentField path_initial_velocity(const Path& path);

struct LogResult {
  TangentField velocity;
  GeodesicResult geodesic;
};

/// Initial velocity of the optimal BVP path from c0 towards the orbit of c1,
/// projected onto the horizontal space at c0.
LogResult riemannian_log(const Curve& c0, const Curve& c1,
                         const MetricParams& params, const BvpOptions& bvp,
                         const IvpOptions& ivp = {});

/// Reparametrization basis used for projections at curves of `space_basis`.
SplineBasis projection_basis(const SplineBasis& space_basis,
                             const IvpOptions& options);

}  // namespace curveshape
