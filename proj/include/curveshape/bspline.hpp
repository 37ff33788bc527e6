#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curveshape {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class SplineFlavor { periodic, clamped };

/// Uniform B-spline basis.
///
/// The periodic flavor lives on [0, 2pi] with N simple knots spaced 2pi/N;
/// basis function j is supported on [j h, (j + p + 1) h] taken modulo 2pi,
/// and controls are stored once (no duplicated wrap controls). The clamped
/// flavor lives on [0, 1] with uniform interior knots and end knots of
/// multiplicity degree + 1.
class SplineBasis {
 public:
  /// Empty placeholder; use make() for a usable basis.
  SplineBasis() = default;
  static SplineBasis make(int degree, int num_controls, SplineFlavor flavor);

  int degree() const { return degree_; }
  int num_controls() const { return num_controls_; }
  SplineFlavor flavor() const { return flavor_; }
  bool periodic() const { return flavor_ == SplineFlavor::periodic; }

  double domain_begin() const { return 0.0; }
  double domain_end() const;
  double domain_length() const { return domain_end() - domain_begin(); }

  /// Full knot vector. For the periodic flavor this is the extended vector
  /// (N + 2p + 1 knots) whose middle N + 1 entries are the breakpoints.
  const std::vector<double>& knots() const { return knots_; }

  /// Distinct knot values bounding the knot intervals of the domain.
  std::vector<double> breakpoints() const;
  int num_intervals() const;

  /// Values and derivatives up to max_deriv of the degree + 1 basis functions
  /// that are nonzero at x. Row d of `ders` holds the d-th derivatives and
  /// column r belongs to control index `indices[r]`.
  struct LocalValues {
    std::vector<int> indices;
    Eigen::MatrixXd ders;
  };
  LocalValues evaluate(double x, int max_deriv) const;

  /// Same as evaluate() without allocating; `indices` must hold degree + 1
  /// entries and `ders` must be at least (max_deriv + 1) x (degree + 1).
  void evaluate_into(double x, int max_deriv, std::span<int> indices,
                     Eigen::Ref<Eigen::MatrixXd> ders) const;

  bool operator==(const SplineBasis& other) const {
    return degree_ == other.degree_ && num_controls_ == other.num_controls_ &&
           flavor_ == other.flavor_;
  }

 private:
  SplineBasis(int degree, int num_controls, SplineFlavor flavor);
  int find_span(double x) const;

  int degree_ = 0;
  int num_controls_ = 0;
  SplineFlavor flavor_ = SplineFlavor::periodic;
  std::vector<double> knots_;
};

/// Sparse |points| x num_controls matrix of deriv_order-th derivatives.
SparseMatrix collocation_matrix(const SplineBasis& basis,
                                std::span<const double> points,
                                int deriv_order);

/// Knot averages xi_i reproducing the identity. For the periodic flavor
/// the values are unwrapped: xi_j = (j + (p + 1) / 2) * 2pi / N.
std::vector<double> greville_abscissas(const SplineBasis& basis);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes,
                    std::vector<double>& weights);

struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule with `order` points on each knot interval.
QuadratureGrid quadrature_grid(const SplineBasis& basis, int order);

/// Default points per knot interval.
inline int default_quadrature_order(const SplineBasis& basis) {
  return basis.degree() + 1;
}

/// Quadrature grid together with the cached collocation matrices for
/// derivative orders 0..max_deriv evaluated on it.
struct GridCollocation {
  SplineBasis basis;
  QuadratureGrid grid;
  std::vector<SparseMatrix> matrices;
  Eigen::VectorXd weights;

  static GridCollocation make(const SplineBasis& basis, int order,
                              int max_deriv);
  static GridCollocation make(const SplineBasis& basis, int max_deriv) {
    return make(basis, default_quadrature_order(basis), max_deriv);
  }

  const SparseMatrix& operator[](int deriv_order) const {
    return matrices.at(static_cast<std::size_t>(deriv_order));
  }
};

/// Wraps an angle into [0, 2pi).
double wrap_angle(double theta);

}  // namespace curveshape
