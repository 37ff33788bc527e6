#include "curveshape/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace curveshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Piegl & Tiller, algorithm A2.3.
void ders_basis_funs(int span, double x, int p, int n,
                     const std::vector<double>& knots,
                     Eigen::Ref<Eigen::MatrixXd> ders) {
  Eigen::MatrixXd ndu(p + 1, p + 1);
  Eigen::VectorXd left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left(j) = x - knots[span + 1 - j];
    right(j) = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right(r + 1) + left(j - r);
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right(r + 1) * temp;
      saved = left(j - r) * temp;
    }
    ndu(j, j) = saved;
  }
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= n; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  int factor = p;
  for (int k = 1; k <= n; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
    factor *= (p - k);
  }
}

}  // namespace

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

SplineBasis::SplineBasis(int degree, int num_controls, SplineFlavor flavor)
    : degree_(degree), num_controls_(num_controls), flavor_(flavor) {
  const int p = degree;
  const int n = num_controls;
  if (flavor == SplineFlavor::periodic) {
    const double h = kTwoPi / n;
    knots_.resize(static_cast<std::size_t>(n + 2 * p + 1));
    for (int k = 0; k <= n + 2 * p; ++k) knots_[k] = (k - p) * h;
  } else {
    const int intervals = n - p;
    knots_.reserve(static_cast<std::size_t>(n + p + 1));
    for (int k = 0; k <= p; ++k) knots_.push_back(0.0);
    for (int k = 1; k < intervals; ++k)
      knots_.push_back(static_cast<double>(k) / intervals);
    for (int k = 0; k <= p; ++k) knots_.push_back(1.0);
  }
}

SplineBasis SplineBasis::make(int degree, int num_controls,
                              SplineFlavor flavor) {
  if (degree < 0) throw Error("spline degree must be nonnegative");
  if (num_controls < degree + 1)
    throw Error("spline needs at least degree + 1 controls (got " +
                std::to_string(num_controls) + " for degree " +
                std::to_string(degree) + ")");
  return SplineBasis(degree, num_controls, flavor);
}

double SplineBasis::domain_end() const {
  return periodic() ? kTwoPi : 1.0;
}

int SplineBasis::num_intervals() const {
  return periodic() ? num_controls_ : num_controls_ - degree_;
}

std::vector<double> SplineBasis::breakpoints() const {
  std::vector<double> out;
  const int m = num_intervals();
  out.reserve(static_cast<std::size_t>(m + 1));
  for (int k = 0; k <= m; ++k)
    out.push_back(domain_begin() + domain_length() * k / m);
  return out;
}

int SplineBasis::find_span(double x) const {
  const int m = num_intervals();
  int k = static_cast<int>(std::floor(x / domain_length() * m));
  k = std::clamp(k, 0, m - 1);
  return k + degree_;
}

void SplineBasis::evaluate_into(double x, int max_deriv,
                                std::span<int> indices,
                                Eigen::Ref<Eigen::MatrixXd> ders) const {
  if (max_deriv > degree_)
    throw Error("derivative order exceeds spline degree");
  if (periodic()) {
    x = wrap_angle(x);
  } else {
    constexpr double kSlack = 1e-12;
    if (x < -kSlack || x > 1.0 + kSlack)
      throw Error("point " + std::to_string(x) +
                  " lies outside the clamped domain [0, 1]");
    x = std::clamp(x, 0.0, 1.0);
  }
  const int span = find_span(x);
  ders.setZero();
  ders_basis_funs(span, x, degree_, max_deriv, knots_,
                  ders.topLeftCorner(max_deriv + 1, degree_ + 1));
  for (int r = 0; r <= degree_; ++r) {
    const int extended = span - degree_ + r;
    indices[r] = periodic()
                     ? ((extended - degree_) % num_controls_ + num_controls_) %
                           num_controls_
                     : extended;
  }
}

SplineBasis::LocalValues SplineBasis::evaluate(double x, int max_deriv) const {
  LocalValues out;
  out.indices.resize(static_cast<std::size_t>(degree_ + 1));
  out.ders.resize(max_deriv + 1, degree_ + 1);
  evaluate_into(x, max_deriv, out.indices, out.ders);
  return out;
}

SparseMatrix collocation_matrix(const SplineBasis& basis,
                                std::span<const double> points,
                                int deriv_order) {
  if (deriv_order < 0 || deriv_order > basis.degree())
    throw Error("collocation derivative order must lie in [0, degree]");
  const int p = basis.degree();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(points.size() * static_cast<std::size_t>(p + 1));
  std::vector<int> idx(static_cast<std::size_t>(p + 1));
  Eigen::MatrixXd ders(deriv_order + 1, p + 1);
  for (std::size_t m = 0; m < points.size(); ++m) {
    basis.evaluate_into(points[m], deriv_order, idx, ders);
    for (int r = 0; r <= p; ++r)
      triplets.emplace_back(static_cast<int>(m), idx[r], ders(deriv_order, r));
  }
  SparseMatrix out(static_cast<Eigen::Index>(points.size()),
                   basis.num_controls());
  // Duplicate (row, col) pairs occur when N < 2p + 1 in the periodic case.
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

std::vector<double> greville_abscissas(const SplineBasis& basis) {
  const int p = basis.degree();
  const int n = basis.num_controls();
  std::vector<double> xi(static_cast<std::size_t>(n));
  if (basis.periodic()) {
    const double h = kTwoPi / n;
    for (int j = 0; j < n; ++j) xi[j] = (j + 0.5 * (p + 1)) * h;
    return xi;
  }
  const auto& t = basis.knots();
  for (int i = 0; i < n; ++i) {
    if (p == 0) {
      xi[i] = 0.5 * (t[i] + t[i + 1]);
      continue;
    }
    double sum = 0.0;
    for (int k = 1; k <= p; ++k) sum += t[i + k];
    xi[i] = sum / p;
  }
  return xi;
}

void gauss_legendre(int order, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (order < 1) throw Error("quadrature order must be at least 1");
  nodes.assign(static_cast<std::size_t>(order), 0.0);
  weights.assign(static_cast<std::size_t>(order), 0.0);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = order * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= order; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
    }
    dp = order * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = w;
    weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) nodes[order / 2] = 0.0;
}

QuadratureGrid quadrature_grid(const SplineBasis& basis, int order) {
  std::vector<double> ref_nodes, ref_weights;
  gauss_legendre(order, ref_nodes, ref_weights);
  const auto bp = basis.breakpoints();
  QuadratureGrid grid;
  grid.order = order;
  grid.nodes.reserve((bp.size() - 1) * static_cast<std::size_t>(order));
  grid.weights.reserve(grid.nodes.capacity());
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
    const double half = 0.5 * (bp[k + 1] - bp[k]);
    const double mid = 0.5 * (bp[k + 1] + bp[k]);
    for (int q = 0; q < order; ++q) {
      grid.nodes.push_back(mid + half * ref_nodes[q]);
      grid.weights.push_back(half * ref_weights[q]);
    }
  }
  return grid;
}

GridCollocation GridCollocation::make(const SplineBasis& basis, int order,
                                      int max_deriv) {
  GridCollocation out{basis, quadrature_grid(basis, order), {}, {}};
  for (int d = 0; d <= max_deriv; ++d)
    out.matrices.push_back(collocation_matrix(basis, out.grid.nodes, d));
  out.weights = Eigen::Map<const Eigen::VectorXd>(
      out.grid.weights.data(), static_cast<Eigen::Index>(out.grid.size()));
  return out;
}

}  // namespace curveshape
