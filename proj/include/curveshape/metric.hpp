#pragma once

#include <span>
#include <vector>

#include "curveshape/curve.hpp"

namespace curveshape {

/// Raised when |c_theta| nearly vanishes at a quadrature node.
class SingularCurveError : public Error {
 public:
  using Error::Error;
};

/// Weights of the L2, H1 and H2 terms of a second order Sobolev metric. With
/// `scale_invariant` the weights become (a0 / l^3, a1 / l, a2 l) where l is
/// the length of the base curve.
struct MetricParams {
  double a0 = 1.0;
  double a1 = 1.0;
  double a2 = 1.0;
  bool scale_invariant = false;

  void validate() const;
  bool operator==(const MetricParams&) const = default;
};

/// L2, H1 and H2 contributions to an energy, before multiplying by a0, a1,
/// a2. In the scale-invariant flavor the length factors are included.
struct EnergyBreakdown {
  double e0 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;

  double weighted(const MetricParams& p) const {
    return p.a0 * e0 + p.a1 * e1 + p.a2 * e2;
  }
};

/// Cached space and time collocation for evaluating a path energy.
struct PathGrids {
  GridCollocation space;  // derivative orders 0..2
  GridCollocation time;   // derivative orders 0..1
  SparseMatrix space_t[3];

  static PathGrids make(const SplineBasis& time_basis,
                        const SplineBasis& space_basis, int space_order = 0,
                        int time_order = 0);
};

/// Space collocation for curve-level metric evaluation (orders 0..2).
GridCollocation metric_grid(const SplineBasis& space_basis, int order = 0);

/// Relative threshold of the near-singularity guard on |c_theta|.
inline constexpr double kSingularSpeed = 1e-8;

double metric_inner(const Curve& curve, const TangentField& h,
                    const TangentField& k, const MetricParams& params,
                    const GridCollocation& grid);
double metric_norm_sq(const Curve& curve, const TangentField& h,
                      const MetricParams& params, const GridCollocation& grid);

/// N x N matrix K with G_c(h, k) = sum over coordinates of h_x^T K k_x.
Eigen::MatrixXd metric_gram(const Curve& curve, const MetricParams& params,
                            const GridCollocation& grid);

/// Gradient of G_c(h, h) with respect to the controls of c, h held fixed.
Points metric_curve_gradient(const Curve& curve, const TangentField& h,
                             const MetricParams& params,
                             const GridCollocation& grid);

struct EnergyResult {
  double energy = 0.0;
  EnergyBreakdown breakdown;
};

struct EnergyGradient {
  double energy = 0.0;
  EnergyBreakdown breakdown;
  Eigen::MatrixXd gx;  // N_t x N_theta
  Eigen::MatrixXd gy;
};

/// E(c) = 1/2 int_0^1 G_c(t)(c_t, c_t) dt by tensor-product quadrature.
EnergyResult path_energy(const Path& path, const MetricParams& params,
                         const PathGrids& grids);

/// Exact gradient of the discretized energy. Rows whose `free_rows` entry
/// is false are zeroed; an empty mask keeps every row.
EnergyGradient path_energy_gradient(const Path& path,
                                    const MetricParams& params,
                                    const PathGrids& grids,
                                    std::span<const bool> free_rows = {});

/// L(c) = int_0^1 sqrt(G_c(t)(c_t, c_t)) dt.
double path_length(const Path& path, const MetricParams& params,
                   const PathGrids& grids);

enum class CalibrationMode { balanced, total_100 };

/// Balances a0 E0 : a1 E1 : a2 E2 = 1 : 1 : 1 from averaged breakdowns of
/// linear paths; total_100 additionally scales the weighted total to 100.
MetricParams calibrate_params(std::span<const EnergyBreakdown> breakdowns,
                              CalibrationMode mode);

}  // namespace curveshape
