#include "curveshape/stats.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "curveshape/io.hpp"

namespace curveshape {

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown by any task is rethrown after all workers have joined.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

double gram_inner(const Eigen::MatrixXd& k, const Points& a, const Points& b) {
  return (a.array() * (k * b).array()).sum();
}

bool same_curve(const Curve& a, const Curve& b) {
  return a.basis == b.basis && a.controls == b.controls;
}

struct LogSample {
  TangentField velocity;
  double distance = 0.0;
};

LogSample log_or_zero(const Curve& base, const Curve& target,
                      const MetricParams& params, const KarcherOptions& options) {
  if (same_curve(base, target)) return {TangentField::zero(base.basis), 0.0};
  LogResult log = riemannian_log(base, target, params, options.bvp, options.ivp);
  return {std::move(log.velocity), log.geodesic.distance};
}

std::vector<LogSample> all_logs(const Curve& base, const std::vector<Curve>& curves,
                                const MetricParams& params,
                                const KarcherOptions& options) {
  std::vector<LogSample> out(curves.size());
  parallel_for(static_cast<int>(curves.size()), options.jobs, [&](int j) {
    out[static_cast<std::size_t>(j)] =
        log_or_zero(base, curves[static_cast<std::size_t>(j)], params, options);
  });
  return out;
}

std::string cache_key(const Curve& c0, const Curve& c1, const MetricParams& params,
                      const BvpOptions& options) {
  const Json key{{"c0", curve_to_json(c0)},
                 {"c1", curve_to_json(c1)},
                 {"params", params_to_json(params)},
                 {"options", bvp_options_to_json(options)}};
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(key.dump())));
  return buf;
}

}  // namespace

DistanceReport distance_matrix(const std::vector<Curve>& curves,
                               const std::vector<std::string>& labels,
                               const MetricParams& params,
                               const DistanceOptions& options) {
  const int n = static_cast<int>(curves.size());
  if (n < 2) throw Error("distance matrix needs at least two curves");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw Error("distance matrix: label count does not match curve count");
  params.validate();

  DistanceReport report;
  report.matrix.labels = labels;
  if (labels.empty())
    for (int i = 0; i < n; ++i) report.matrix.labels.push_back(std::to_string(i));

  if (!options.cache_dir.empty())
    std::filesystem::create_directories(options.cache_dir);

  // Both solve directions of every unordered pair.
  std::vector<std::pair<int, int>> tasks;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) tasks.emplace_back(i, j);

  Eigen::MatrixXd directed = Eigen::MatrixXd::Zero(n, n);
  std::vector<char> hit(tasks.size(), 0);
  std::vector<std::string> failures(tasks.size());

  parallel_for(static_cast<int>(tasks.size()), options.jobs, [&](int t) {
    const auto [i, j] = tasks[static_cast<std::size_t>(t)];
    const Curve& a = curves[static_cast<std::size_t>(i)];
    const Curve& b = curves[static_cast<std::size_t>(j)];
    std::string file;
    if (!options.cache_dir.empty()) {
      file = (std::filesystem::path(options.cache_dir) /
              (cache_key(a, b, params, options.bvp) + ".json"))
                 .string();
      if (std::filesystem::exists(file)) {
        try {
          directed(i, j) = read_json(file).at("distance").get<double>();
          hit[static_cast<std::size_t>(t)] = 1;
          return;
        } catch (const std::exception&) {
          // Unreadable cache entries are recomputed.
        }
      }
    }
    try {
      GeodesicResult r = solve_bvp({a, b, params, options.bvp});
      if (!std::isfinite(r.distance)) throw Error("non-finite distance");
      directed(i, j) = r.distance;
      if (!file.empty()) {
        r.trace.clear();
        const std::string tmp = file + ".tmp" + std::to_string(t);
        write_json(tmp, geodesic_to_json(r));
        std::filesystem::rename(tmp, file);
      }
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(t)] = e.what();
    }
  });

  std::string failed;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (failures[t].empty()) continue;
    if (!failed.empty()) failed += "; ";
    failed += "(" + report.matrix.labels[static_cast<std::size_t>(tasks[t].first)] + "," +
              report.matrix.labels[static_cast<std::size_t>(tasks[t].second)] +
              "): " + failures[t];
  }
  if (!failed.empty()) throw Error("distance matrix cells failed: " + failed);

  report.matrix.d = 0.5 * (directed + directed.transpose());
  report.matrix.d.diagonal().setZero();
  for (std::size_t t = 0; t < tasks.size(); ++t) report.cache_hits += hit[t];
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto fwd = static_cast<std::size_t>(i * (n - 1) + j - 1);
      const auto bwd = static_cast<std::size_t>(j * (n - 1) + i);
      if (!hit[fwd] || !hit[bwd]) ++report.pairs_solved;
    }
  return report;
}

KarcherResult karcher_mean(const std::vector<Curve>& curves,
                           const MetricParams& params,
                           const KarcherOptions& options) {
  if (curves.empty()) throw Error("Karcher mean needs at least one curve");
  params.validate();
  const double n = static_cast<double>(curves.size());
  const GridCollocation grid = metric_grid(curves.front().basis, options.ivp.quad_order);

  struct State {
    Curve curve;
    TangentField h;
    double f = 0.0;
    double h_norm = 0.0;
  };
  auto evaluate_state = [&](const Curve& c) {
    const std::vector<LogSample> logs = all_logs(c, curves, params, options);
    State s{c, TangentField::zero(c.basis)};
    for (const auto& l : logs) {
      s.h.controls += l.velocity.controls / n;
      s.f += l.distance * l.distance / n;
    }
    s.h_norm = std::sqrt(std::max(0.0, metric_norm_sq(c, s.h, params, grid)));
    return s;
  };

  KarcherResult out;
  State cur = evaluate_state(curves.front());
  out.f_trace.push_back(cur.f);
  out.step_norms.push_back(cur.h_norm);
  for (int it = 0; it < options.max_iter; ++it) {
    if (cur.h_norm <= std::max(options.tol * std::sqrt(cur.f), options.abs_tol)) {
      out.converged = true;
      break;
    }
    double tau = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, tau *= 0.5) {
      TangentField step = cur.h;
      step.controls *= tau;
      State trial;
      try {
        const Curve next =
            discrete_exp(cur.curve, step, options.steps, params, options.ivp).endpoint();
        trial = evaluate_state(next);
      } catch (const SingularCurveError&) {
        continue;
      }
      if (trial.f <= cur.f) {
        cur = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
    ++out.iterations;
    out.f_trace.push_back(cur.f);
    out.step_norms.push_back(cur.h_norm);
  }
  if (!out.converged && !out.stalled &&
      cur.h_norm <= std::max(options.tol * std::sqrt(cur.f), options.abs_tol))
    out.converged = true;
  out.mean = cur.curve;
  return out;
}

PcaResult tangent_pca_from_velocities(const Curve& base,
                                      const std::vector<TangentField>& velocities,
                                      const MetricParams& params) {
  const int n = static_cast<int>(velocities.size());
  if (n < 2) throw Error("tangent PCA needs at least two shapes");
  const GridCollocation grid = metric_grid(base.basis);
  const Eigen::MatrixXd k = metric_gram(base, params, grid);

  PcaResult out;
  out.base = base;
  Points mean = Points::Zero(base.controls.rows(), 2);
  for (const auto& v : velocities) {
    if (!(v.basis == base.basis)) throw Error("tangent PCA: velocity basis mismatch");
    mean += v.controls / n;
  }
  for (const auto& v : velocities) out.centered.push_back({base.basis, v.controls - mean});

  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      g(i, j) = g(j, i) = gram_inner(k, out.centered[i].controls, out.centered[j].controls);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g / n);
  const Eigen::VectorXd lam = eig.eigenvalues().reverse();
  const Eigen::MatrixXd u = eig.eigenvectors().rowwise().reverse();
  const double cutoff = 1e-12 * std::max(lam.maxCoeff(), 0.0);
  int rank = 0;
  while (rank < n && lam[rank] > cutoff && lam[rank] > 0.0) ++rank;
  if (rank == 0) throw Error("tangent PCA: all velocities coincide");

  out.eigenvalues = lam.head(rank);
  out.explained = out.eigenvalues / out.eigenvalues.sum();
  out.scores.resize(n, rank);
  for (int i = 0; i < rank; ++i) {
    Eigen::VectorXd ui = u.col(i);
    // Fix the sign so the largest coefficient is positive.
    Eigen::Index arg;
    ui.cwiseAbs().maxCoeff(&arg);
    if (ui[arg] < 0) ui = -ui;
    TangentField dir = TangentField::zero(base.basis);
    for (int j = 0; j < n; ++j) dir.controls += ui[j] * out.centered[j].controls;
    dir.controls /= std::sqrt(gram_inner(k, dir.controls, dir.controls));
    for (int j = 0; j < n; ++j)
      out.scores(j, i) = gram_inner(k, out.centered[j].controls, dir.controls);
    out.directions.push_back(std::move(dir));
  }
  return out;
}

PcaResult tangent_pca(const Curve& mean, const std::vector<Curve>& curves,
                      const MetricParams& params, const KarcherOptions& options) {
  if (curves.size() < 2) throw Error("tangent PCA needs at least two shapes");
  const std::vector<LogSample> logs = all_logs(mean, curves, params, options);
  std::vector<TangentField> velocities;
  velocities.reserve(logs.size());
  for (const auto& l : logs) velocities.push_back(l.velocity);
  return tangent_pca_from_velocities(mean, velocities, params);
}

std::vector<Curve> principal_geodesic(const PcaResult& pca, int component,
                                      const std::vector<double>& times,
                                      const MetricParams& params, int steps,
                                      const IvpOptions& ivp) {
  if (component < 0 || component >= static_cast<int>(pca.directions.size()))
    throw Error("principal geodesic: component " + std::to_string(component) +
                " out of range");
  const double sigma = std::sqrt(std::max(0.0, pca.eigenvalues[component]));
  std::vector<Curve> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t == 0.0) {
      out.push_back(pca.base);
      continue;
    }
    TangentField h = pca.directions[static_cast<std::size_t>(component)];
    h.controls *= t * sigma;
    try {
      out.push_back(discrete_exp(pca.base, h, steps, params, ivp).endpoint());
    } catch (const std::exception& e) {
      throw Error("principal geodesic: shooting failed at t=" + format_double(t) +
                  ": " + e.what());
    }
  }
  return out;
}

MdsResult classical_mds(const DistanceMatrix& dm, int dim) {
  const Eigen::Index n = dm.d.rows();
  if (n == 0 || dm.d.cols() != n) throw Error("MDS needs a square distance matrix");
  if (dim < 1) throw Error("MDS dimension must be positive");
  const Eigen::MatrixXd d2 = dm.d.array().square().matrix();
  const Eigen::MatrixXd j =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  Eigen::MatrixXd b = -0.5 * j * d2 * j;
  b = 0.5 * (b + b.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  const Eigen::VectorXd lam = eig.eigenvalues().reverse();
  const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();
  const double cutoff = 1e-12 * std::max(1.0, std::abs(lam[0]));

  MdsResult out;
  out.coords = Eigen::MatrixXd::Zero(n, dim);
  out.eigenvalues = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < dim; ++i) {
    if (i >= n || lam[i] <= cutoff) {
      out.padded = true;
      continue;
    }
    Eigen::VectorXd v = vecs.col(i);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    out.eigenvalues[i] = lam[i];
    out.coords.col(i) = v * std::sqrt(lam[i]);
  }
  return out;
}

Linkage parse_linkage(const std::string& name) {
  if (name == "single") return Linkage::single;
  if (name == "complete") return Linkage::complete;
  if (name == "average") return Linkage::average;
  throw Error("unknown linkage '" + name + "' (expected single, complete or average)");
}

std::vector<int> agglomerative_cluster(const DistanceMatrix& dm, int k,
                                       Linkage linkage) {
  const int n = static_cast<int>(dm.d.rows());
  if (k < 1 || k > n) throw Error("cluster count must lie in [1, n]");
  // Clusters stay ordered by their smallest member.
  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) clusters[static_cast<std::size_t>(i)] = {i};

  auto link = [&](const std::vector<int>& a, const std::vector<int>& b) {
    double best = linkage == Linkage::single ? INFINITY : 0.0;
    double sum = 0.0;
    for (int i : a)
      for (int j : b) {
        const double v = dm.d(i, j);
        if (linkage == Linkage::single) best = std::min(best, v);
        else if (linkage == Linkage::complete) best = std::max(best, v);
        else sum += v;
      }
    if (linkage == Linkage::average)
      return sum / static_cast<double>(a.size() * b.size());
    return best;
  };

  while (static_cast<int>(clusters.size()) > k) {
    std::size_t ba = 0, bb = 1;
    double best = INFINITY;
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double v = link(clusters[a], clusters[b]);
        if (v < best) {
          best = v;
          ba = a;
          bb = b;
        }
      }
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }

  std::vector<int> owner(static_cast<std::size_t>(n));
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (int i : clusters[c]) owner[static_cast<std::size_t>(i)] = static_cast<int>(c);
  std::vector<int> relabel(clusters.size(), -1), labels(static_cast<std::size_t>(n));
  int next = 0;
  for (int i = 0; i < n; ++i) {
    int& r = relabel[static_cast<std::size_t>(owner[static_cast<std::size_t>(i)])];
    if (r < 0) r = next++;
    labels[static_cast<std::size_t>(i)] = r;
  }
  return labels;
}

double clustering_purity(const std::vector<int>& labels, const std::vector<int>& truth) {
  if (labels.size() != truth.size() || labels.empty())
    throw Error("purity: label vectors must be nonempty and equally long");
  std::map<int, std::map<int, int>> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) ++counts[labels[i]][truth[i]];
  int agree = 0;
  for (const auto& [cluster, per_class] : counts) {
    int best = 0;
    for (const auto& [cls, c] : per_class) best = std::max(best, c);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(labels.size());
}

}  // namespace curveshape
