#include "curveshape/ivp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace curveshape {

namespace {

Eigen::VectorXd flatten(const Points& p) {
  Eigen::VectorXd v(2 * p.rows());
  v << p.col(0), p.col(1);
  return v;
}

Points unflatten(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size() / 2;
  Points p(n, 2);
  p.col(0) = v.head(n);
  p.col(1) = v.tail(n);
  return p;
}

// sqrt(sum over coordinates of r_x^T K^{-1} r_x): norm of a covector.
double dual_norm(const Eigen::LDLT<Eigen::MatrixXd>& k, const Points& r) {
  const Points s = k.solve(r);
  return std::sqrt(std::max(0.0, (r.array() * s.array()).sum()));
}

}  // namespace

SplineBasis projection_basis(const SplineBasis& space_basis,
                             const IvpOptions& options) {
  const int n = std::min(options.reparam_controls, space_basis.num_controls());
  const int p = std::min(options.reparam_degree, n - 1);
  return SplineBasis::make(p, n, SplineFlavor::periodic);
}

std::vector<TangentField> vertical_fields(const Curve& curve,
                                          const SplineBasis& reparam_basis) {
  const GrevilleInterpolator interp(curve.basis);
  const Points tangents = evaluate(curve, interp.sites(), 1);
  const Eigen::MatrixXd d =
      Eigen::MatrixXd(collocation_matrix(reparam_basis, interp.sites(), 0));
  std::vector<TangentField> out;
  out.reserve(static_cast<std::size_t>(reparam_basis.num_controls()));
  for (int i = 0; i < reparam_basis.num_controls(); ++i) {
    const Points samples = tangents.array().colwise() * d.col(i).array();
    out.push_back({curve.basis, interp.solve(samples)});
  }
  return out;
}

TangentField horizontal_project(const Curve& curve, const TangentField& h,
                                const MetricParams& params,
                                const SplineBasis& reparam_basis,
                                const GridCollocation& grid) {
  const std::vector<TangentField> v = vertical_fields(curve, reparam_basis);
  const Eigen::MatrixXd k = metric_gram(curve, params, grid);
  const Eigen::Index m = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd a(m, m);
  Eigen::VectorXd b(m);
  std::vector<Points> kv;
  kv.reserve(v.size());
  for (const auto& f : v) kv.push_back(k * f.controls);
  for (Eigen::Index i = 0; i < m; ++i) {
    b[i] = (h.controls.array() * kv[i].array()).sum();
    for (Eigen::Index j = 0; j <= i; ++j)
      a(i, j) = a(j, i) = (v[j].controls.array() * kv[i].array()).sum();
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * a.diagonal().maxCoeff())
    throw Error("horizontal projection: vertical Gram matrix is singular");
  const Eigen::VectorXd coef = ldlt.solve(b);
  TangentField out = h;
  for (Eigen::Index i = 0; i < m; ++i) out.controls -= coef[i] * v[i].controls;
  return out;
}

TangentField horizontal_project(const Curve& curve, const TangentField& h,
                                const MetricParams& params,
                                const IvpOptions& options) {
  return horizontal_project(curve, h, params,
                            projection_basis(curve.basis, options),
                            metric_grid(curve.basis, options.quad_order));
}

DiscreteGeodesic discrete_exp(const Curve& c0, const TangentField& h, int steps,
                              const MetricParams& params,
                              const IvpOptions& options) {
  if (steps < 1) throw Error("discrete exponential needs at least one step");
  if (!(h.basis == c0.basis))
    throw Error("initial velocity must share the curve basis");
  params.validate();
  const GridCollocation grid = metric_grid(c0.basis, options.quad_order);
  DiscreteGeodesic out;
  out.steps = steps;
  out.params = params;
  out.curves.reserve(static_cast<std::size_t>(steps + 1));
  out.curves.push_back(c0);
  out.curves.push_back({c0.basis, c0.controls + h.controls / steps});

  Eigen::MatrixXd k_prev;
  try {
    k_prev = metric_gram(c0, params, grid);
  } catch (const SingularCurveError&) {
    throw SingularCurveError("discrete exponential: initial curve is singular");
  }
  for (int k = 1; k < steps; ++k) {
    const Curve& prev = out.curves[k - 1];
    const Curve& cur = out.curves[k];
    Eigen::MatrixXd k_cur;
    try {
      k_cur = metric_gram(cur, params, grid);
    } catch (const SingularCurveError&) {
      throw SingularCurveError("discrete exponential: curve " +
                               std::to_string(k) + " lost regularity");
    }
    const Eigen::LDLT<Eigen::MatrixXd> k_cur_ldlt(k_cur);
    const Points rhs = 2.0 * k_prev * (cur.controls - prev.controls);
    const double scale = std::max(dual_norm(k_cur_ldlt, rhs), 1e-300);

    auto residual = [&](const Points& w) -> Points {
      const Points q = metric_curve_gradient(cur, {cur.basis, w}, params, grid);
      return rhs + q - 2.0 * k_cur * w;
    };

    Points w = cur.controls - prev.controls;
    Points r = residual(w);
    double rnorm = dual_norm(k_cur_ldlt, r);
    int it = 0;
    for (; it < options.max_newton && rnorm > options.tol * scale; ++it) {
      // The curve-gradient term is quadratic in w, so central differences of
      // any width give its Jacobian exactly (up to rounding).
      const Eigen::Index n2 = 2 * w.rows();
      const double eps = std::max(w.cwiseAbs().maxCoeff(), 1e-8);
      Eigen::MatrixXd jac(n2, n2);
      Eigen::VectorXd wf = flatten(w);
      for (Eigen::Index j = 0; j < n2; ++j) {
        Eigen::VectorXd wp = wf, wm = wf;
        wp[j] += eps;
        wm[j] -= eps;
        const Points qp =
            metric_curve_gradient(cur, {cur.basis, unflatten(wp)}, params, grid);
        const Points qm =
            metric_curve_gradient(cur, {cur.basis, unflatten(wm)}, params, grid);
        jac.col(j) = flatten(qp - qm) / (2.0 * eps);
      }
      const Eigen::Index n = w.rows();
      jac.topLeftCorner(n, n) -= 2.0 * k_cur;
      jac.bottomRightCorner(n, n) -= 2.0 * k_cur;
      const Eigen::VectorXd delta = -jac.partialPivLu().solve(flatten(r));

      double step = 1.0;
      bool improved = false;
      for (int bt = 0; bt < 30; ++bt) {
        const Points trial = w + step * unflatten(delta);
        const Points rt = residual(trial);
        const double tn = dual_norm(k_cur_ldlt, rt);
        if (std::isfinite(tn) && tn < rnorm) {
          w = trial;
          r = rt;
          rnorm = tn;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    // Rounding can stall Newton slightly above tol; accept a small margin.
    if (!(rnorm <= 1e3 * options.tol * scale))
      throw Error("discrete exponential: root finder failed at step " +
                  std::to_string(k) + " (residual " + std::to_string(rnorm / scale) +
                  ")");
    out.curves.push_back({cur.basis, cur.controls + w});
    k_prev = std::move(k_cur);
  }
  try {
    metric_gram(out.curves.back(), params, grid);
  } catch (const SingularCurveError&) {
    throw SingularCurveError("discrete exponential: curve " +
                             std::to_string(steps) + " lost regularity");
  }
  return out;
}

TangentField path_initial_velocity(const Path& path) {
  const auto local = path.time_basis.evaluate(0.0, 1);
  TangentField v = TangentField::zero(path.space_basis);
  for (std::size_t r = 0; r < local.indices.size(); ++r) {
    const double w = local.ders(1, static_cast<Eigen::Index>(r));
    v.controls.col(0) += w * path.x.row(local.indices[r]).transpose();
    v.controls.col(1) += w * path.y.row(local.indices[r]).transpose();
  }
  return v;
}

LogResult riemannian_log(const Curve& c0, const Curve& c1,
                         const MetricParams& params, const BvpOptions& bvp,
                         const IvpOptions& ivp) {
  LogResult out{TangentField::zero(c0.basis), solve_bvp({c0, c1, params, bvp})};
  IvpOptions proj = ivp;
  proj.reparam_degree = bvp.reparam_degree;
  proj.reparam_controls = bvp.reparam_controls;
  out.velocity = horizontal_project(c0, path_initial_velocity(out.geodesic.path),
                                    params, proj);
  return out;
}

}  // namespace curveshape
