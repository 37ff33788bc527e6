#include "curveshape/bvp.hpp"

#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <numbers>

#include "curveshape/lbfgs.hpp"

namespace curveshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Matrix2d rotation_matrix(double beta) {
  Eigen::Matrix2d r;
  r << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
  return r;
}

Eigen::Matrix2d rotation_derivative(double beta) {
  Eigen::Matrix2d r;
  r << -std::sin(beta), -std::cos(beta), std::cos(beta), -std::sin(beta);
  return r;
}

// Greville spacings xi_i - xi_{i-1} of a periodic basis, cyclically.
Eigen::VectorXd greville_gaps(const SplineBasis& basis) {
  const auto xi = greville_abscissas(basis);
  const int n = basis.num_controls();
  Eigen::VectorXd gaps(n);
  for (int i = 0; i < n; ++i)
    gaps[i] = i == 0 ? xi[0] - (xi[n - 1] - kTwoPi) : xi[i] - xi[i - 1];
  return gaps;
}

Eigen::VectorXd slacks(const Eigen::VectorXd& phi, const Eigen::VectorXd& gaps) {
  const Eigen::Index n = phi.size();
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i)
    s[i] = gaps[i] - (phi[(i + n - 1) % n] - phi[i]);
  return s;
}

// Orthonormal basis of the zero-sum subspace of R^n.
Eigen::MatrixXd zero_mean_basis(int n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(n, 1));
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

// Evaluates c and c_theta at a list of parameters.
void eval_curve_and_speed(const Curve& c, const Eigen::VectorXd& params,
                          Points& values, Points& tangents) {
  const int p = c.basis.degree();
  std::vector<int> idx(static_cast<std::size_t>(p + 1));
  Eigen::MatrixXd ders(2, p + 1);
  values.resize(params.size(), 2);
  tangents.resize(params.size(), 2);
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    c.basis.evaluate_into(params[k], 1, idx, ders);
    Vec2 v = Vec2::Zero(), d = Vec2::Zero();
    for (int r = 0; r <= p; ++r) {
      v += ders(0, r) * c.controls.row(idx[r]).transpose();
      d += ders(1, r) * c.controls.row(idx[r]).transpose();
    }
    values.row(k) = v.transpose();
    tangents.row(k) = d.transpose();
  }
}

// Boundary map (phi, alpha, beta, v) -> final control row.
class BoundaryMap {
 public:
  BoundaryMap(const Curve& c1, const SplineBasis& reparam_basis)
      : c1_(c1), interp_(c1.basis) {
    const auto& sites = interp_.sites();
    sites_ = Eigen::Map<const Eigen::VectorXd>(sites.data(),
                                               static_cast<Eigen::Index>(sites.size()));
    reparam_at_sites_ =
        Eigen::MatrixXd(collocation_matrix(reparam_basis, sites, 0));
  }

  const GrevilleInterpolator& interpolator() const { return interp_; }

  struct Eval {
    Eigen::VectorXd z;
    Points values;    // c1(z_k)
    Points tangents;  // c1'(z_k)
    Points samples;   // R (c1(z_k) + v)
    Points controls;
  };

  Eval evaluate(const Eigen::VectorXd& phi, double alpha,
                const RigidMotion& rigid) const {
    Eval e;
    e.z = sites_ + reparam_at_sites_ * phi;
    e.z.array() -= alpha;
    eval_curve_and_speed(c1_, e.z, e.values, e.tangents);
    const Eigen::Matrix2d r = rigid.rotation();
    e.samples = (e.values.rowwise() + rigid.v.transpose()) * r.transpose();
    e.controls = interp_.solve(e.samples);
    return e;
  }

  // Chains a gradient with respect to the final controls back to
  // (phi, alpha, beta, v).
  void backprop(const Eval& e, const RigidMotion& rigid, const Points& g_controls,
                Eigen::VectorXd& g_phi, double& g_alpha, double& g_beta,
                Vec2& g_v) const {
    const Points g_samples = interp_.solve_transpose(g_controls);
    const Eigen::Matrix2d r = rigid.rotation();
    const Eigen::Matrix2d dr = rotation_derivative(rigid.beta);
    const Points rotated_tangents = e.tangents * r.transpose();
    const Eigen::VectorXd g_z = (g_samples.array() * rotated_tangents.array()).rowwise().sum();
    g_phi = reparam_at_sites_.transpose() * g_z;
    g_alpha = -g_z.sum();
    const Points shifted = e.values.rowwise() + rigid.v.transpose();
    g_beta = (g_samples.array() * (shifted * dr.transpose()).array()).sum();
    g_v = r.transpose() * g_samples.colwise().sum().transpose();
  }

 private:
  const Curve& c1_;
  GrevilleInterpolator interp_;
  Eigen::VectorXd sites_;
  Eigen::MatrixXd reparam_at_sites_;
};

// Variable layout: interior path rows (x block then y block), zero-mean
// reparametrization coordinates and alpha, beta, v; groups per flags.
class BvpObjective {
 public:
  BvpObjective(const GeodesicProblem& problem, const PathGrids& grids,
               const SplineBasis& reparam_basis)
      : problem_(problem),
        grids_(grids),
        flags_(problem.options.flags),
        boundary_(problem.c1, reparam_basis),
        zero_mean_(zero_mean_basis(reparam_basis.num_controls())),
        gaps_(greville_gaps(reparam_basis)),
        nt_(grids.time.basis.num_controls()),
        ns_(problem.c0.size()),
        nphi_(reparam_basis.num_controls()) {
    interior_ = (nt_ - 2) * ns_;
    int offset = 2 * interior_;
    if (flags_.reparam) {
      z_offset_ = offset;
      offset += nphi_ - 1;
      alpha_offset_ = offset++;
    }
    if (flags_.rotation) beta_offset_ = offset++;
    if (flags_.translation) {
      v_offset_ = offset;
      offset += 2;
    }
    size_ = offset;
    template_ = Path::make(grids.time.basis, grids.space.basis);
    template_.set_row(0, problem.c0.controls);
  }

  int size() const { return size_; }
  void set_mu(double mu) { mu_ = mu; }
  double mu() const { return mu_; }
  double last_energy() const { return last_energy_; }
  double last_slack() const { return last_slack_; }

  Eigen::VectorXd pack(const Path& path, const Eigen::VectorXd& phi,
                       double alpha, const RigidMotion& rigid) const {
    Eigen::VectorXd x(size_);
    for (int i = 1; i < nt_ - 1; ++i) {
      x.segment((i - 1) * ns_, ns_) = path.x.row(i).transpose();
      x.segment(interior_ + (i - 1) * ns_, ns_) = path.y.row(i).transpose();
    }
    if (flags_.reparam) {
      x.segment(z_offset_, nphi_ - 1) = zero_mean_.transpose() * phi;
      x[alpha_offset_] = alpha;
    }
    if (flags_.rotation) x[beta_offset_] = rigid.beta;
    if (flags_.translation) x.segment<2>(v_offset_) = rigid.v;
    return x;
  }

  struct Unpacked {
    Eigen::VectorXd phi;
    double alpha = 0.0;
    RigidMotion rigid;
  };

  Unpacked unpack_group(const Eigen::VectorXd& x) const {
    Unpacked u;
    u.phi = Eigen::VectorXd::Zero(nphi_);
    if (flags_.reparam) {
      u.phi = zero_mean_ * x.segment(z_offset_, nphi_ - 1);
      u.alpha = x[alpha_offset_];
    } else {
      u.alpha = fixed_alpha_;
    }
    u.rigid.beta = flags_.rotation ? x[beta_offset_] : fixed_rigid_.beta;
    u.rigid.v = flags_.translation ? Vec2(x.segment<2>(v_offset_)) : fixed_rigid_.v;
    return u;
  }

  void set_fixed(double alpha, const RigidMotion& rigid) {
    fixed_alpha_ = alpha;
    fixed_rigid_ = rigid;
  }

  Path path_for(const Eigen::VectorXd& x) const {
    Path path = template_;
    for (int i = 1; i < nt_ - 1; ++i) {
      path.x.row(i) = x.segment((i - 1) * ns_, ns_).transpose();
      path.y.row(i) = x.segment(interior_ + (i - 1) * ns_, ns_).transpose();
    }
    const Unpacked u = unpack_group(x);
    path.set_row(nt_ - 1, boundary_.evaluate(u.phi, u.alpha, u.rigid).controls);
    return path;
  }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const Unpacked u = unpack_group(x);
    double barrier = 0.0;
    Eigen::VectorXd s;
    if (flags_.reparam) {
      s = slacks(u.phi, gaps_);
      if (s.minCoeff() <= 0.0) return kInf;
      barrier = -mu_ * s.array().log().sum();
    }
    const BoundaryMap::Eval be = boundary_.evaluate(u.phi, u.alpha, u.rigid);
    Path path = template_;
    for (int i = 1; i < nt_ - 1; ++i) {
      path.x.row(i) = x.segment((i - 1) * ns_, ns_).transpose();
      path.y.row(i) = x.segment(interior_ + (i - 1) * ns_, ns_).transpose();
    }
    path.set_row(nt_ - 1, be.controls);

    EnergyGradient eg;
    try {
      if (grad) {
        eg = path_energy_gradient(path, problem_.params, grids_);
      } else {
        eg.energy = path_energy(path, problem_.params, grids_).energy;
      }
    } catch (const SingularCurveError&) {
      return kInf;
    }
    if (!std::isfinite(eg.energy)) return kInf;
    last_energy_ = eg.energy;
    last_slack_ = flags_.reparam ? s.minCoeff() : 0.0;
    if (!grad) return eg.energy + barrier;

    grad->resize(size_);
    for (int i = 1; i < nt_ - 1; ++i) {
      grad->segment((i - 1) * ns_, ns_) = eg.gx.row(i).transpose();
      grad->segment(interior_ + (i - 1) * ns_, ns_) = eg.gy.row(i).transpose();
    }
    Points g_final(ns_, 2);
    g_final.col(0) = eg.gx.row(nt_ - 1).transpose();
    g_final.col(1) = eg.gy.row(nt_ - 1).transpose();
    Eigen::VectorXd g_phi;
    double g_alpha = 0.0, g_beta = 0.0;
    Vec2 g_v;
    boundary_.backprop(be, u.rigid, g_final, g_phi, g_alpha, g_beta, g_v);
    if (flags_.reparam) {
      for (int i = 0; i < nphi_; ++i) {
        g_phi[i] -= mu_ / s[i];
        g_phi[(i + nphi_ - 1) % nphi_] += mu_ / s[i];
      }
      grad->segment(z_offset_, nphi_ - 1) = zero_mean_.transpose() * g_phi;
      (*grad)[alpha_offset_] = g_alpha;
    }
    if (flags_.rotation) (*grad)[beta_offset_] = g_beta;
    if (flags_.translation) grad->segment<2>(v_offset_) = g_v;
    return eg.energy + barrier;
  }

 private:
  const GeodesicProblem& problem_;
  const PathGrids& grids_;
  QuotientFlags flags_;
  BoundaryMap boundary_;
  Eigen::MatrixXd zero_mean_;
  Eigen::VectorXd gaps_;
  int nt_, ns_, nphi_;
  int interior_ = 0;
  int z_offset_ = -1, alpha_offset_ = -1, beta_offset_ = -1, v_offset_ = -1;
  int size_ = 0;
  double mu_ = 0.0;
  double fixed_alpha_ = 0.0;
  RigidMotion fixed_rigid_;
  Path template_;
  double last_energy_ = 0.0;
  double last_slack_ = 0.0;
};

void validate_problem(const GeodesicProblem& problem) {
  const auto& o = problem.options;
  problem.params.validate();
  if (!(problem.c0.basis == problem.c1.basis))
    throw Error("boundary curves must share the same spline basis");
  if (o.time_controls < 3)
    throw Error("geodesic paths need at least 3 time controls");
  if (o.flags.reparam && o.reparam_controls < o.reparam_degree + 1)
    throw Error("reparametrization basis needs degree + 1 controls");
  for (const Curve* c : {&problem.c0, &problem.c1}) {
    const double len = curve_length(*c);
    if (!(len > 0.0) ||
        check_regularity(*c) < kSingularSpeed * len / kTwoPi)
      throw SingularCurveError("boundary curve is not regular");
  }
}

}  // namespace

Reparam Reparam::identity(const SplineBasis& basis) {
  return {basis, Eigen::VectorXd::Zero(basis.num_controls()), 0.0};
}

double Reparam::psi(double theta) const {
  const auto local = basis.evaluate(theta, 0);
  double v = theta;
  for (std::size_t r = 0; r < local.indices.size(); ++r)
    v += local.ders(0, static_cast<Eigen::Index>(r)) * phi[local.indices[r]];
  return v;
}

double Reparam::min_slack() const {
  return slacks(phi, greville_gaps(basis)).minCoeff();
}

Eigen::Matrix2d RigidMotion::rotation() const { return rotation_matrix(beta); }

Curve apply_boundary_transform(const Curve& c1, const Reparam& rep,
                               const RigidMotion& rigid, double* refit_error) {
  if (!rep.feasible())
    throw Error("reparametrization violates the diffeomorphism condition");
  const BoundaryMap map(c1, rep.basis);
  const auto e = map.evaluate(rep.phi, rep.alpha, rigid);
  Curve out{c1.basis, e.controls};
  if (refit_error) {
    const auto& sites = map.interpolator().sites();
    const int n = c1.size();
    double err = 0.0;
    const Eigen::Matrix2d r = rigid.rotation();
    for (int k = 0; k < n; ++k) {
      const double mid = sites[k] + 0.5 * kTwoPi / n;
      const Vec2 exact =
          r * (evaluate(c1, rep.psi(mid) - rep.alpha, 0) + rigid.v);
      err = std::max(err, (exact - evaluate(out, mid, 0)).norm());
    }
    *refit_error = err;
  }
  return out;
}

RigidMotion procrustes_align(const Points& moving, const Points& fixed,
                             bool rotation, bool translation) {
  RigidMotion rm;
  Vec2 mean_m = Vec2::Zero(), mean_f = Vec2::Zero();
  if (translation) {
    mean_m = moving.colwise().mean().transpose();
    mean_f = fixed.colwise().mean().transpose();
  }
  if (rotation) {
    double dot = 0.0, cross = 0.0;
    for (Eigen::Index k = 0; k < moving.rows(); ++k) {
      const Vec2 a = moving.row(k).transpose() - mean_m;
      const Vec2 b = fixed.row(k).transpose() - mean_f;
      dot += a.dot(b);
      cross += a.x() * b.y() - a.y() * b.x();
    }
    rm.beta = wrap_angle(std::atan2(cross, dot));
  }
  if (translation) rm.v = rm.rotation().transpose() * mean_f - mean_m;
  return rm;
}

Curve homotopy_circle(const Curve& c0, const Curve& c1) {
  const Vec2 center = 0.5 * (control_centroid(c0) + control_centroid(c1));
  auto mean_radius = [](const Curve& c) {
    const Points s = sample_curve(c, 8 * c.size());
    const Vec2 m = control_centroid(c);
    return (s.rowwise() - m.transpose()).rowwise().norm().mean();
  };
  const double radius = 0.5 * (mean_radius(c0) + mean_radius(c1));
  Curve circle = make_circle(c0.basis, center, radius);
  const Points& p0 = c0.controls;
  double area = 0.0;
  for (Eigen::Index k = 0; k < p0.rows(); ++k) {
    const Eigen::Index l = (k + 1) % p0.rows();
    area += p0(k, 0) * p0(l, 1) - p0(l, 0) * p0(k, 1);
  }
  if (area < 0.0) {
    circle.controls.col(1) = (2.0 * center.y() - circle.controls.col(1).array()).matrix();
  }
  const int n = c0.size();
  int best_shift = 0;
  double best = kInf;
  for (int shift = 0; shift < n; ++shift) {
    double d = 0.0;
    for (int j = 0; j < n; ++j)
      d += (circle.controls.row((j + shift) % n) - p0.row(j)).squaredNorm();
    if (d < best) {
      best = d;
      best_shift = shift;
    }
  }
  Points shifted(n, 2);
  for (int j = 0; j < n; ++j) shifted.row(j) = circle.controls.row((j + best_shift) % n);
  circle.controls = shifted;
  return circle;
}

Path initial_path(const Curve& c0, const Curve& c1, InitStrategy strategy,
                  const SplineBasis& time_basis) {
  if (!(c0.basis == c1.basis))
    throw Error("initial path endpoints must share the space basis");
  Path path = Path::make(time_basis, c0.basis);
  const int nt = time_basis.num_controls();
  if (strategy == InitStrategy::linear) {
    const auto xi = greville_abscissas(time_basis);
    for (int i = 0; i < nt; ++i)
      path.set_row(i, (1.0 - xi[i]) * c0.controls + xi[i] * c1.controls);
  } else {
    const Curve circle = homotopy_circle(c0, c1);
    const int mid = (nt - 1) / 2 > 0 ? (nt - 1) / 2 : 1;
    for (int i = 0; i < nt; ++i) {
      if (i <= mid) {
        const double s = static_cast<double>(i) / mid;
        path.set_row(i, (1.0 - s) * c0.controls + s * circle.controls);
      } else {
        const double s = static_cast<double>(i - mid) / (nt - 1 - mid);
        path.set_row(i, (1.0 - s) * circle.controls + s * c1.controls);
      }
    }
  }
  path.set_row(0, c0.controls);
  path.set_row(nt - 1, c1.controls);
  return path;
}

GeodesicResult solve_bvp(const GeodesicProblem& problem) {
  validate_problem(problem);
  const BvpOptions& o = problem.options;
  const SplineBasis time_basis =
      SplineBasis::make(o.time_degree, o.time_controls, SplineFlavor::clamped);
  const SplineBasis reparam_basis = SplineBasis::make(
      o.reparam_degree, std::max(o.reparam_controls, o.reparam_degree + 1),
      SplineFlavor::periodic);
  const PathGrids grids = PathGrids::make(time_basis, problem.c0.basis,
                                          o.space_quad_order, o.time_quad_order);
  const GrevilleInterpolator interp(problem.c0.basis);
  const Points c0_samples = evaluate(problem.c0, interp.sites(), 0);

  const int starts = o.flags.reparam ? std::max(1, o.alpha_starts) : 1;
  GeodesicResult best;
  bool have_best = false;

  for (int start = 0; start < starts; ++start) {
    const double alpha0 = kTwoPi * start / starts;
    BvpObjective objective(problem, grids, reparam_basis);

    // Align the shifted target to c0 before building the homotopy.
    std::vector<double> shifted_sites(interp.sites().size());
    for (std::size_t k = 0; k < shifted_sites.size(); ++k)
      shifted_sites[k] = interp.sites()[k] - alpha0;
    const Points c1_samples = evaluate(problem.c1, shifted_sites, 0);
    const RigidMotion rigid0 = procrustes_align(
        c1_samples, c0_samples, o.flags.rotation, o.flags.translation);
    objective.set_fixed(o.flags.reparam ? alpha0 : 0.0, rigid0);
    Reparam rep0 = Reparam::identity(reparam_basis);
    rep0.alpha = o.flags.reparam ? alpha0 : 0.0;
    const Curve target0 = apply_boundary_transform(problem.c1, rep0, rigid0);
    const Path path0 = initial_path(problem.c0, target0, o.init, time_basis);
    Eigen::VectorXd x = objective.pack(path0, rep0.phi, rep0.alpha, rigid0);

    double energy0 = 0.0;
    try {
      energy0 = path_energy(path0, problem.params, grids).energy;
    } catch (const SingularCurveError&) {
      // The homotopy passes through a singular curve; fall back to the
      // straight line, which the optimizer then has to untangle.
      const Path lin = initial_path(problem.c0, target0, InitStrategy::linear,
                                    time_basis);
      x = objective.pack(lin, rep0.phi, rep0.alpha, rigid0);
      energy0 = path_energy(lin, problem.params, grids).energy;
    }

    GeodesicResult result;
    double mu = o.flags.reparam ? std::max(o.mu_factor * energy0, o.mu_floor) : 0.0;
    int stage = 0;
    LbfgsOptions lo;
    lo.max_iter = o.max_iter;
    lo.gtol = o.gtol * std::max(1.0, energy0);
    lo.xtol = o.xtol;
    lo.ftol = o.ftol;
    lo.on_iteration = [&](const LbfgsIteration& it) {
      result.trace.push_back({stage, it.iteration, it.value,
                              objective.last_energy(), mu,
                              objective.last_slack(), it.step_norm,
                              it.grad_norm});
    };
    const Objective fn = [&](const Eigen::VectorXd& v, Eigen::VectorXd* g) {
      return objective(v, g);
    };
    LbfgsResult lr;
    for (;;) {
      objective.set_mu(mu);
      lr = minimize_lbfgs(fn, x, lo);
      x = lr.x;
      objective(x, nullptr);
      const double energy = objective.last_energy();
      if (!o.flags.reparam || mu <= o.mu_floor ||
          reparam_basis.num_controls() * mu <=
              o.barrier_gap * std::max(energy, 1e-300))
        break;
      mu = std::max(0.5 * mu, o.mu_floor);
      ++stage;
    }

    result.path = objective.path_for(x);
    const auto u = objective.unpack_group(x);
    result.reparam = {reparam_basis, u.phi, u.alpha};
    result.rigid = u.rigid;
    result.rigid.beta = wrap_angle(result.rigid.beta);
    const EnergyResult er = path_energy(result.path, problem.params, grids);
    result.energy = er.energy;
    result.breakdown = er.breakdown;
    result.distance = path_length(result.path, problem.params, grids);
    result.converged = lr.converged;
    result.status = lr.status;
    result.alpha_start = alpha0;
    if (!have_best || result.energy < best.energy) {
      best = std::move(result);
      have_best = true;
    }
  }
  return best;
}

double geodesic_distance(const Curve& c0, const Curve& c1,
                         const MetricParams& params, const BvpOptions& options,
                         bool symmetrized) {
  const double forward = solve_bvp({c0, c1, params, options}).distance;
  if (!symmetrized) return forward;
  return 0.5 * (forward + solve_bvp({c1, c0, params, options}).distance);
}

}  // namespace curveshape
