#pragma once

#include <string>
#include <vector>

#include "curveshape/ivp.hpp"

namespace curveshape {

struct DistanceMatrix {
  Eigen::MatrixXd d;
  std::vector<std::string> labels;

  Eigen::Index size() const { return d.rows(); }
};

struct DistanceOptions {
  BvpOptions bvp;
  int jobs = 1;
  /// When non-empty, per-pair results are cached here keyed by a hash of
  /// the pair, the metric and the solver options.
  std::string cache_dir;
};

struct DistanceReport {
  DistanceMatrix matrix;
  int pairs_solved = 0;  // unordered pairs computed (cache hits excluded)
  int cache_hits = 0;
};

/// Pairwise geodesic distances, symmetrized by averaging both solve
/// directions. Throws listing every failed cell.
DistanceReport distance_matrix(const std::vector<Curve>& curves,
                               const std::vector<std::string>& labels,
                               const MetricParams& params,
                               const DistanceOptions& options);

struct KarcherOptions {
  BvpOptions bvp;
  IvpOptions ivp;
  int steps = 10;          // discrete exponential steps per update
  int max_iter = 20;
  double tol = 1e-3;       // on |h|_G relative to sqrt(F)
  double abs_tol = 1e-9;
  int max_halvings = 6;
  int jobs = 1;
};

struct KarcherResult {
  Curve mean;
  std::vector<double> f_trace;     // F at every accepted iterate
  std::vector<double> step_norms;  // |h|_G at every accepted iterate
  int iterations = 0;
  bool converged = false;
  /// Set when a step could not decrease F after all halvings.
  bool stalled = false;
};

/// Minimizer of F(c) = (1/n) sum dist(c, c_j)^2 by log-average fixed point
/// iteration starting from `curves.front()`.
KarcherResult karcher_mean(const std::vector<Curve>& curves,
                           const MetricParams& params,
                           const KarcherOptions& options);

struct PcaResult {
  Curve base;
  Eigen::VectorXd eigenvalues;           // nonincreasing, nonnegative
  std::vector<TangentField> directions;  // G_base-orthonormal
  Eigen::VectorXd explained;             // eigenvalue fractions
  Eigen::MatrixXd scores;                // shapes x components
  std::vector<TangentField> centered;    // centered log velocities
};

/// PCA of tangent vectors at `base` with respect to G_base.
PcaResult tangent_pca_from_velocities(const Curve& base,
                                      const std::vector<TangentField>& velocities,
                                      const MetricParams& params);

/// Log-maps every curve to `mean` and runs tangent_pca_from_velocities.
PcaResult tangent_pca(const Curve& mean, const std::vector<Curve>& curves,
                      const MetricParams& params, const KarcherOptions& options);

/// Endpoints of discrete_exp(base, t sqrt(lambda_i) dir_i) for every t.
std::vector<Curve> principal_geodesic(const PcaResult& pca, int component,
                                      const std::vector<double>& times,
                                      const MetricParams& params, int steps,
                                      const IvpOptions& ivp = {});

struct MdsResult {
  Eigen::MatrixXd coords;  // n x dim
  Eigen::VectorXd eigenvalues;
  bool padded = false;  // fewer positive eigenvalues than dim
};

MdsResult classical_mds(const DistanceMatrix& dm, int dim);

enum class Linkage { single, complete, average };

Linkage parse_linkage(const std::string& name);

/// Bottom-up clustering into k groups; labels are numbered by first
/// appearance.
std::vector<int> agglomerative_cluster(const DistanceMatrix& dm, int k,
                                       Linkage linkage = Linkage::average);

/// Fraction of points whose cluster's majority class equals their class.
double clustering_purity(const std::vector<int>& labels,
                         const std::vector<int>& truth);

}  // namespace curveshape
