#include "curveshape/metric.hpp"

#include <cmath>
#include <numbers>

namespace curveshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Pointwise integrand of G_c(h, h) / dtheta written in terms of
// u = h, p = h_theta, r = h_thth, a = c_theta, b = c_thth:
//   A0 s |u|^2 + A1 |p|^2 / s + A2 s |q|^2,  q = r / s^2 - p (a.b) / s^4.
struct LocalTerms {
  double s = 0.0;
  double m = 0.0;
  Vec2 q;
  double t0 = 0.0, t1 = 0.0, t2 = 0.0;
};

struct LocalGrad {
  Vec2 du, dp, dr, da, db;
};

inline LocalTerms local_terms(const Vec2& u, const Vec2& p, const Vec2& r,
                              const Vec2& a, const Vec2& b) {
  LocalTerms l;
  l.s = a.norm();
  l.m = a.dot(b);
  const double s2 = l.s * l.s;
  l.q = r / s2 - p * (l.m / (s2 * s2));
  l.t0 = l.s * u.squaredNorm();
  l.t1 = p.squaredNorm() / l.s;
  l.t2 = l.s * l.q.squaredNorm();
  return l;
}

// Partial derivatives of A0 t0 + A1 t1 + A2 t2.
inline LocalGrad local_grad(const Vec2& u, const Vec2& p, const Vec2& r,
                            const Vec2& a, const Vec2& b, const LocalTerms& l,
                            double w0, double w1, double w2) {
  const double s = l.s, s2 = s * s, s4 = s2 * s2;
  const Vec2 g = 2.0 * w2 * s * l.q;
  const double gp = g.dot(p);
  LocalGrad d;
  d.du = 2.0 * w0 * s * u;
  d.dp = (2.0 * w1 / s) * p - (l.m / s4) * g;
  d.dr = g / s2;
  d.db = (-gp / s4) * a;
  const Vec2 dq_ds = -2.0 * r / (s2 * s) + 4.0 * l.m / (s4 * s) * p;
  const double d_ds = w0 * u.squaredNorm() - w1 * p.squaredNorm() / s2 +
                      w2 * l.q.squaredNorm() + g.dot(dq_ds);
  d.da = (d_ds / s) * a + (-gp / s4) * b;
  return d;
}

struct Weights {
  double w0, w1, w2;
  // Derivatives with respect to the curve length (scale-invariant only).
  double dw0, dw1, dw2;
};

inline Weights weights_for(const MetricParams& p, double length) {
  if (!p.scale_invariant) return {p.a0, p.a1, p.a2, 0.0, 0.0, 0.0};
  const double l = length, l2 = l * l;
  return {p.a0 / (l2 * l), p.a1 / l, p.a2 * l,
          -3.0 * p.a0 / (l2 * l2), -p.a1 / l2, p.a2};
}

inline void guard_speed(double s, double length) {
  if (!(s > kSingularSpeed * length / kTwoPi) || !std::isfinite(s))
    throw SingularCurveError(
        "singular curve: |c_theta| vanishes at a quadrature node");
}

// Values of a spline and its first two derivatives at the grid nodes.
struct CurveJets {
  Points v0, v1, v2;
};

CurveJets jets(const Points& controls, const GridCollocation& grid) {
  return {grid[0] * controls, grid[1] * controls, grid[2] * controls};
}

double length_from(const Points& d1, const GridCollocation& grid) {
  return grid.weights.dot(d1.rowwise().norm());
}

void check_grid(const Curve& curve, const GridCollocation& grid) {
  if (!(curve.basis == grid.basis) || grid.matrices.size() < 3)
    throw Error("metric grid does not match the curve basis");
}

}  // namespace

void MetricParams::validate() const {
  if (!(a0 > 0.0) || !(a2 > 0.0) || !(a1 >= 0.0) || !std::isfinite(a0) ||
      !std::isfinite(a1) || !std::isfinite(a2))
    throw Error("metric constants must satisfy a0 > 0, a2 > 0, a1 >= 0");
}

PathGrids PathGrids::make(const SplineBasis& time_basis,
                          const SplineBasis& space_basis, int space_order,
                          int time_order) {
  PathGrids g{
      GridCollocation::make(space_basis,
                            space_order > 0 ? space_order
                                            : default_quadrature_order(space_basis),
                            2),
      GridCollocation::make(time_basis,
                            time_order > 0 ? time_order
                                           : default_quadrature_order(time_basis),
                            1),
      {}};
  for (int d = 0; d < 3; ++d) g.space_t[d] = g.space[d].transpose();
  return g;
}

GridCollocation metric_grid(const SplineBasis& space_basis, int order) {
  return GridCollocation::make(
      space_basis, order > 0 ? order : default_quadrature_order(space_basis), 2);
}

double metric_inner(const Curve& curve, const TangentField& h,
                    const TangentField& k, const MetricParams& params,
                    const GridCollocation& grid) {
  check_grid(curve, grid);
  const CurveJets c = jets(curve.controls, grid);
  const CurveJets jh = jets(h.controls, grid);
  const CurveJets jk = jets(k.controls, grid);
  const double len = length_from(c.v1, grid);
  const Weights w = weights_for(params, len);
  double sum = 0.0;
  for (Eigen::Index q = 0; q < c.v1.rows(); ++q) {
    const Vec2 a = c.v1.row(q).transpose(), b = c.v2.row(q).transpose();
    const double s = a.norm();
    guard_speed(s, len);
    const double m = a.dot(b), s2 = s * s, s4 = s2 * s2;
    const Vec2 ph = jh.v1.row(q).transpose(), pk = jk.v1.row(q).transpose();
    const Vec2 qh = jh.v2.row(q).transpose() / s2 - ph * (m / s4);
    const Vec2 qk = jk.v2.row(q).transpose() / s2 - pk * (m / s4);
    sum += grid.weights[q] *
           (w.w0 * s * jh.v0.row(q).dot(jk.v0.row(q)) + w.w1 * ph.dot(pk) / s +
            w.w2 * s * qh.dot(qk));
  }
  return sum;
}

double metric_norm_sq(const Curve& curve, const TangentField& h,
                      const MetricParams& params, const GridCollocation& grid) {
  return metric_inner(curve, h, h, params, grid);
}

Eigen::MatrixXd metric_gram(const Curve& curve, const MetricParams& params,
                            const GridCollocation& grid) {
  check_grid(curve, grid);
  const CurveJets c = jets(curve.controls, grid);
  const double len = length_from(c.v1, grid);
  const Weights w = weights_for(params, len);
  const Eigen::Index nq = c.v1.rows();
  Eigen::VectorXd d0(nq), d1(nq), d2(nq), inv_s2(nq), ms4(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Vec2 a = c.v1.row(q).transpose(), b = c.v2.row(q).transpose();
    const double s = a.norm();
    guard_speed(s, len);
    const double s2 = s * s;
    d0[q] = grid.weights[q] * w.w0 * s;
    d1[q] = grid.weights[q] * w.w1 / s;
    d2[q] = grid.weights[q] * w.w2 * s;
    inv_s2[q] = 1.0 / s2;
    ms4[q] = a.dot(b) / (s2 * s2);
  }
  const SparseMatrix second =
      inv_s2.asDiagonal() * grid[2] - SparseMatrix(ms4.asDiagonal() * grid[1]);
  Eigen::MatrixXd k = Eigen::MatrixXd(grid[0].transpose() * d0.asDiagonal() * grid[0]);
  k += Eigen::MatrixXd(grid[1].transpose() * d1.asDiagonal() * grid[1]);
  k += Eigen::MatrixXd(second.transpose() * d2.asDiagonal() * second);
  return 0.5 * (k + k.transpose());
}

Points metric_curve_gradient(const Curve& curve, const TangentField& h,
                             const MetricParams& params,
                             const GridCollocation& grid) {
  check_grid(curve, grid);
  const CurveJets c = jets(curve.controls, grid);
  const CurveJets jh = jets(h.controls, grid);
  const double len = length_from(c.v1, grid);
  const Weights w = weights_for(params, len);
  const Eigen::Index nq = c.v1.rows();
  Points ga(nq, 2), gb(nq, 2);
  double d_len = 0.0;
  std::vector<LocalTerms> terms(static_cast<std::size_t>(nq));
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Vec2 u = jh.v0.row(q).transpose(), p = jh.v1.row(q).transpose(),
               r = jh.v2.row(q).transpose(), a = c.v1.row(q).transpose(),
               b = c.v2.row(q).transpose();
    guard_speed(a.norm(), len);
    const LocalTerms l = local_terms(u, p, r, a, b);
    const LocalGrad d = local_grad(u, p, r, a, b, l, w.w0, w.w1, w.w2);
    ga.row(q) = grid.weights[q] * d.da.transpose();
    gb.row(q) = grid.weights[q] * d.db.transpose();
    d_len += grid.weights[q] * (w.dw0 * l.t0 + w.dw1 * l.t1 + w.dw2 * l.t2);
    terms[q] = l;
  }
  if (params.scale_invariant) {
    for (Eigen::Index q = 0; q < nq; ++q)
      ga.row(q) += d_len * grid.weights[q] * c.v1.row(q) / terms[q].s;
  }
  return grid[1].transpose() * ga + grid[2].transpose() * gb;
}

namespace {

struct NodeFields {
  Eigen::MatrixXd u[2], p[2], r[2], a[2], b[2];
};

NodeFields node_fields(const Path& path, const PathGrids& g) {
  NodeFields f;
  const Eigen::MatrixXd* coords[2] = {&path.x, &path.y};
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd xt = g.time[1] * (*coords[k]);
    const Eigen::MatrixXd x0 = g.time[0] * (*coords[k]);
    f.u[k] = xt * g.space_t[0];
    f.p[k] = xt * g.space_t[1];
    f.r[k] = xt * g.space_t[2];
    f.a[k] = x0 * g.space_t[1];
    f.b[k] = x0 * g.space_t[2];
  }
  return f;
}

void check_path(const Path& path, const PathGrids& g) {
  if (!(path.space_basis == g.space.basis) || !(path.time_basis == g.time.basis))
    throw Error("path grids do not match the path bases");
}

EnergyGradient energy_impl(const Path& path, const MetricParams& params,
                           const PathGrids& g, bool with_gradient) {
  check_path(path, g);
  const NodeFields f = node_fields(path, g);
  const Eigen::Index nt = f.u[0].rows(), nq = f.u[0].cols();
  const Eigen::VectorXd& wt = g.time.weights;
  const Eigen::VectorXd& wq = g.space.weights;

  EnergyGradient out;
  Eigen::MatrixXd gu[2], gp[2], gr[2], ga[2], gb[2];
  if (with_gradient) {
    for (int k = 0; k < 2; ++k) {
      gu[k].resize(nt, nq);
      gp[k].resize(nt, nq);
      gr[k].resize(nt, nq);
      ga[k].resize(nt, nq);
      gb[k].resize(nt, nq);
    }
  }
  std::vector<LocalTerms> terms(static_cast<std::size_t>(nq));
  for (Eigen::Index t = 0; t < nt; ++t) {
    double len = 0.0;
    for (Eigen::Index q = 0; q < nq; ++q)
      len += wq[q] * std::hypot(f.a[0](t, q), f.a[1](t, q));
    const Weights w = weights_for(params, len);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, d_len = 0.0;
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Vec2 u(f.u[0](t, q), f.u[1](t, q)), p(f.p[0](t, q), f.p[1](t, q)),
          r(f.r[0](t, q), f.r[1](t, q)), a(f.a[0](t, q), f.a[1](t, q)),
          b(f.b[0](t, q), f.b[1](t, q));
      guard_speed(a.norm(), len);
      const LocalTerms l = local_terms(u, p, r, a, b);
      s0 += wq[q] * l.t0;
      s1 += wq[q] * l.t1;
      s2 += wq[q] * l.t2;
      if (!with_gradient) continue;
      terms[q] = l;
      const double scale = 0.5 * wt[t] * wq[q];
      const LocalGrad d = local_grad(u, p, r, a, b, l, w.w0, w.w1, w.w2);
      for (int k = 0; k < 2; ++k) {
        gu[k](t, q) = scale * d.du[k];
        gp[k](t, q) = scale * d.dp[k];
        gr[k](t, q) = scale * d.dr[k];
        ga[k](t, q) = scale * d.da[k];
        gb[k](t, q) = scale * d.db[k];
      }
    }
    const double half_w = 0.5 * wt[t];
    if (params.scale_invariant) {
      out.breakdown.e0 += half_w * s0 / (len * len * len);
      out.breakdown.e1 += half_w * s1 / len;
      out.breakdown.e2 += half_w * s2 * len;
      d_len = half_w * (w.dw0 * s0 + w.dw1 * s1 + w.dw2 * s2);
    } else {
      out.breakdown.e0 += half_w * s0;
      out.breakdown.e1 += half_w * s1;
      out.breakdown.e2 += half_w * s2;
    }
    out.energy += half_w * (w.w0 * s0 + w.w1 * s1 + w.w2 * s2);
    if (with_gradient && params.scale_invariant) {
      for (Eigen::Index q = 0; q < nq; ++q)
        for (int k = 0; k < 2; ++k)
          ga[k](t, q) += d_len * wq[q] * f.a[k](t, q) / terms[q].s;
    }
  }
  if (with_gradient) {
    Eigen::MatrixXd* outs[2] = {&out.gx, &out.gy};
    for (int k = 0; k < 2; ++k) {
      const Eigen::MatrixXd moving = gu[k] * g.space[0] + gp[k] * g.space[1] +
                                     gr[k] * g.space[2];
      const Eigen::MatrixXd shape = ga[k] * g.space[1] + gb[k] * g.space[2];
      *outs[k] = g.time[1].transpose() * moving + g.time[0].transpose() * shape;
    }
  }
  return out;
}

}  // namespace

EnergyResult path_energy(const Path& path, const MetricParams& params,
                         const PathGrids& grids) {
  const EnergyGradient e = energy_impl(path, params, grids, false);
  return {e.energy, e.breakdown};
}

EnergyGradient path_energy_gradient(const Path& path,
                                    const MetricParams& params,
                                    const PathGrids& grids,
                                    std::span<const bool> free_rows) {
  EnergyGradient e = energy_impl(path, params, grids, true);
  if (!free_rows.empty()) {
    if (free_rows.size() != static_cast<std::size_t>(path.time_controls()))
      throw Error("free-row mask must have one entry per time control");
    for (std::size_t i = 0; i < free_rows.size(); ++i)
      if (!free_rows[i]) {
        e.gx.row(static_cast<Eigen::Index>(i)).setZero();
        e.gy.row(static_cast<Eigen::Index>(i)).setZero();
      }
  }
  return e;
}

double path_length(const Path& path, const MetricParams& params,
                   const PathGrids& grids) {
  check_path(path, grids);
  const NodeFields f = node_fields(path, grids);
  const Eigen::Index nt = f.u[0].rows(), nq = f.u[0].cols();
  double total = 0.0;
  for (Eigen::Index t = 0; t < nt; ++t) {
    double len = 0.0;
    for (Eigen::Index q = 0; q < nq; ++q)
      len += grids.space.weights[q] * std::hypot(f.a[0](t, q), f.a[1](t, q));
    const Weights w = weights_for(params, len);
    double g = 0.0;
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Vec2 a(f.a[0](t, q), f.a[1](t, q));
      guard_speed(a.norm(), len);
      const LocalTerms l = local_terms(
          Vec2(f.u[0](t, q), f.u[1](t, q)), Vec2(f.p[0](t, q), f.p[1](t, q)),
          Vec2(f.r[0](t, q), f.r[1](t, q)), a, Vec2(f.b[0](t, q), f.b[1](t, q)));
      g += grids.space.weights[q] * (w.w0 * l.t0 + w.w1 * l.t1 + w.w2 * l.t2);
    }
    total += grids.time.weights[t] * std::sqrt(std::max(g, 0.0));
  }
  return total;
}

MetricParams calibrate_params(std::span<const EnergyBreakdown> breakdowns,
                              CalibrationMode mode) {
  if (breakdowns.empty()) throw Error("calibration needs at least one path");
  EnergyBreakdown mean;
  for (const auto& b : breakdowns) {
    mean.e0 += b.e0;
    mean.e1 += b.e1;
    mean.e2 += b.e2;
  }
  const double n = static_cast<double>(breakdowns.size());
  mean.e0 /= n;
  mean.e1 /= n;
  mean.e2 /= n;
  if (!(mean.e0 > 0.0) || !(mean.e1 > 0.0) || !(mean.e2 > 0.0))
    throw Error("degenerate calibration: an average energy contribution is zero");
  MetricParams p;
  p.a0 = 1.0;
  p.a1 = mean.e0 / mean.e1;
  p.a2 = mean.e0 / mean.e2;
  if (mode == CalibrationMode::total_100) {
    const double scale = 100.0 / (3.0 * mean.e0);
    p.a0 *= scale;
    p.a1 *= scale;
    p.a2 *= scale;
  }
  return p;
}

}  // namespace curveshape
