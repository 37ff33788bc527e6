#pragma once

#include <string>
#include <vector>

#include "curveshape/curve.hpp"
#include "curveshape/metric.hpp"

namespace curveshape {

/// Reparametrization psi = id + phi of the circle followed by a constant
/// shift alpha, with phi expanded in a periodic basis.
struct Reparam {
  SplineBasis basis;
  Eigen::VectorXd phi;
  double alpha = 0.0;

  static Reparam identity(const SplineBasis& basis);

  /// psi(theta) = theta + phi(theta); not wrapped.
  double psi(double theta) const;
  /// min_i (xi_i - xi_{i-1}) - (phi_{i-1} - phi_i), taken cyclically. The map
  /// is a diffeomorphism when this is positive.
  double min_slack() const;
  bool feasible() const { return min_slack() > 0.0; }
};

/// Rotation about the origin by beta after a translation by v.
struct RigidMotion {
  double beta = 0.0;
  Vec2 v = Vec2::Zero();

  Eigen::Matrix2d rotation() const;
};

struct QuotientFlags {
  bool reparam = true;
  bool rotation = true;
  bool translation = true;
};

enum class InitStrategy { linear, via_circle };

struct BvpOptions {
  int time_degree = 2;
  int time_controls = 20;
  int reparam_degree = 3;
  int reparam_controls = 20;
  QuotientFlags flags;
  InitStrategy init = InitStrategy::via_circle;
  /// Equispaced initial shifts alpha tried when reparametrizations are free.
  int alpha_starts = 4;
  /// L-BFGS iteration cap per barrier stage.
  int max_iter = 3000;
  double gtol = 1e-9;
  double xtol = 1e-10;
  double ftol = 1e-12;
  /// Initial barrier weight relative to the initial path energy.
  double mu_factor = 1e-2;
  double mu_floor = 1e-10;
  /// Stop the continuation once N_phi * mu <= barrier_gap * energy.
  double barrier_gap = 1e-7;
  int space_quad_order = 0;
  int time_quad_order = 0;
};

struct GeodesicProblem {
  Curve c0;
  Curve c1;
  MetricParams params;
  BvpOptions options;
};

struct TraceEntry {
  int stage = 0;
  int iteration = 0;
  double objective = 0.0;  // energy plus barrier
  double energy = 0.0;
  double mu = 0.0;
  double min_slack = 0.0;
  double step_norm = 0.0;
  double grad_norm = 0.0;
};

struct GeodesicResult {
  Path path;
  Reparam reparam;
  RigidMotion rigid;
  double energy = 0.0;
  double distance = 0.0;
  EnergyBreakdown breakdown;
  std::vector<TraceEntry> trace;
  bool converged = false;
  std::string status;
  /// Initial shift of the multistart that produced this result.
  double alpha_start = 0.0;
};

/// theta -> R_beta(c1(psi(theta) - alpha) + v), interpolated in c1's basis at
/// its Greville abscissas. `refit_error` receives the largest deviation from
/// the exact composition at the midpoints between interpolation sites.
Curve apply_boundary_transform(const Curve& c1, const Reparam& rep,
                               const RigidMotion& rigid,
                               double* refit_error = nullptr);

/// Rigid motion (per flags) best aligning samples of `moving` to `fixed` at
/// the interpolation sites, in the least-squares sense.
RigidMotion procrustes_align(const Points& moving, const Points& fixed,
                             bool rotation, bool translation);

/// Circle used by the via_circle homotopy.
Curve homotopy_circle(const Curve& c0, const Curve& c1);

Path initial_path(const Curve& c0, const Curve& c1_transformed,
                  InitStrategy strategy, const SplineBasis& time_basis);

GeodesicResult solve_bvp(const GeodesicProblem& problem);

double geodesic_distance(const Curve& c0, const Curve& c1,
                         const MetricParams& params, const BvpOptions& options,
                         bool symmetrized = false);

}  // namespace curveshape
