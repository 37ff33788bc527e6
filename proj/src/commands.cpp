#include "curveshape/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "curveshape/contour.hpp"
#include "curveshape/svg.hpp"
#include "curveshape/synthetic.hpp"

namespace curveshape {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& keys() {
  static const std::vector<std::string> k = {
      "a0",           "a1",           "a2",          "scale_invariant",
      "space_degree", "space_controls", "reparam_degree", "reparam_controls",
      "time_degree",  "time_controls", "reparam",     "rotation",
      "translation",  "unit_speed",   "init",        "alpha_starts",
      "max_iter",     "gtol",         "barrier_gap", "steps",
      "karcher_iter", "karcher_tol",  "smoothing",   "linkage",
      "cache_dir",    "seed",         "jobs",        "verbose"};
  return k;
}

template <typename T>
void assign(T& field, const Json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw Error("expected a boolean");
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v.is_number()) throw Error("expected a number");
      if constexpr (std::is_integral_v<T>)
        if (!v.is_number_integer() && !v.is_number_unsigned())
          throw Error("expected an integer");
    } else {
      if (!v.is_string()) throw Error("expected a string");
    }
    field = v.get<T>();
  } catch (const std::exception& e) {
    throw Error("config key '" + key + "': " + e.what());
  }
}

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// Interprets a command-line value as JSON when it parses, else as a string.
Json cli_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception&) {
    return Json(text);
  }
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) out << text;
  else write_text(path, text);
}

void write_json_or_print(const std::string& path, const Json& j, std::ostream& out) {
  write_or_print(path, j.dump(2) + "\n", out);
}

std::vector<Curve> maybe_unit_speed(std::vector<Curve> curves, const RunConfig& cfg) {
  if (cfg.unit_speed)
    for (auto& c : curves) c = constant_speed_reparam(c);
  return curves;
}

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw Error("");
    } catch (const std::exception&) {
      throw Error("invalid time '" + item + "'");
    }
  }
  if (out.empty()) throw Error("no times given");
  return out;
}

std::vector<int> groups_of(const std::vector<std::string>& labels) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  for (const auto& l : labels) {
    const auto [it, inserted] = ids.emplace(group_of(l), static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

struct Logger {
  bool enabled;
  std::ostream& err;
  void operator()(const std::string& msg) const {
    if (enabled) err << "curveshape: " << msg << "\n";
  }
};

// Per-subcommand arguments.
struct Args {
  std::string image, polyline, out, svg, c0, c1, velocity, velocity_out, curves, mean,
      dm, pca, path, mds, mode = "balanced", times = "-3,-2,-1,0,1,2,3",
      out_dir, params_file;
  bool invert = false, purity = false, fit = false;
  int dim = 2, k = 4, component = 0, snapshots = 5, per_group = 5, samples = 400;
  int width = 640, height = 640;
  double stroke = 1.5, noise = 0.02;
};

SvgStyle style_of(const Args& a) {
  SvgStyle s;
  s.width = a.width;
  s.height = a.height;
  s.stroke_width = a.stroke;
  return s;
}

void cmd_fit(const RunConfig& cfg, const Args& a, std::ostream& out) {
  if (a.image.empty() == a.polyline.empty())
    throw Error("give exactly one of --image or --polyline");
  const Points points = a.image.empty()
                            ? parse_polyline(read_text(a.polyline))
                            : extract_contour(read_binary_image(a.image, a.invert));
  if (points.rows() < 3) throw Error("no contour: fewer than three points");
  const SplineBasis basis =
      SplineBasis::make(cfg.space_degree, cfg.space_controls, SplineFlavor::periodic);
  Curve c = fit_curve(points, basis, cfg.smoothing);
  if (cfg.unit_speed) c = constant_speed_reparam(c);
  const double reg = check_regularity(c);
  if (!(reg > 0.0)) throw Error("fitted curve is not regular");
  Json j = curve_to_json(c);
  j["length"] = curve_length(c);
  j["regularity"] = reg;
  write_json_or_print(a.out, j, out);
}

void cmd_calibrate(const RunConfig& cfg, const Args& a, std::ostream& out) {
  const LabeledCurves set = load_curve_dir(a.curves);
  const auto curves = maybe_unit_speed(set.curves, cfg);
  const SplineBasis time_basis =
      SplineBasis::make(cfg.time_degree, cfg.time_controls, SplineFlavor::clamped);
  const auto breakdowns = calibration_breakdowns(curves, time_basis);
  EnergyBreakdown mean;
  for (const auto& b : breakdowns) {
    mean.e0 += b.e0 / breakdowns.size();
    mean.e1 += b.e1 / breakdowns.size();
    mean.e2 += b.e2 / breakdowns.size();
  }
  const MetricParams balanced = calibrate_params(breakdowns, CalibrationMode::balanced);
  const MetricParams total = calibrate_params(breakdowns, CalibrationMode::total_100);
  if (a.mode != "balanced" && a.mode != "total_100")
    throw Error("unknown calibration mode '" + a.mode + "'");
  Json j = params_to_json(a.mode == "total_100" ? total : balanced);
  j["mode"] = a.mode;
  j["modes"] = {{"balanced", params_to_json(balanced)},
                {"total_100", params_to_json(total)}};
  j["mean_breakdown"] = breakdown_to_json(mean);
  j["pairs"] = breakdowns.size();
  write_json_or_print(a.out, j, out);
}

void cmd_geodesic(const RunConfig& cfg, const Args& a, std::ostream& out,
                  const Logger& log) {
  auto curves = maybe_unit_speed({curve_from_json(read_json(a.c0)),
                                  curve_from_json(read_json(a.c1))},
                                 cfg);
  const BvpOptions bvp = bvp_options(cfg);
  const GeodesicResult r = solve_bvp({curves[0], curves[1], cfg.params, bvp});
  log("geodesic: " + r.status);
  Json j = geodesic_to_json(r);
  j["params"] = params_to_json(cfg.params);
  j["options"] = bvp_options_to_json(bvp);
  if (!a.velocity_out.empty()) {
    IvpOptions proj = ivp_options(cfg);
    const TangentField v =
        horizontal_project(curves[0], path_initial_velocity(r.path), cfg.params, proj);
    write_json(a.velocity_out, field_to_json(v));
  }
  if (!a.svg.empty()) write_text(a.svg, render_path(r.path, a.snapshots, style_of(a)));
  if (a.out.empty()) {
    out << j.dump(2) << "\n";
  } else {
    write_json(a.out, j);
    out << Json{{"distance", r.distance}, {"energy", r.energy}, {"converged", r.converged}}
               .dump()
        << "\n";
  }
}

void cmd_exp(const RunConfig& cfg, const Args& a, std::ostream& out) {
  const Curve c0 = curve_from_json(read_json(a.c0));
  const TangentField h = field_from_json(read_json(a.velocity));
  const DiscreteGeodesic g = discrete_exp(c0, h, cfg.steps, cfg.params, ivp_options(cfg));
  Json j = discrete_geodesic_to_json(g);
  j["endpoint"] = curve_to_json(g.endpoint());
  write_json_or_print(a.out, j, out);
  if (!a.svg.empty()) {
    std::vector<Curve> shown;
    const int n = std::max(1, a.snapshots);
    for (int k = 0; k < n; ++k) {
      const int idx = n == 1 ? 0 : static_cast<int>(std::lround(
                                      static_cast<double>(k) * g.steps / (n - 1)));
      shown.push_back(g.curves[static_cast<std::size_t>(idx)]);
    }
    write_text(a.svg, render_curves(shown, style_of(a)));
  }
}

void cmd_mean(const RunConfig& cfg, const Args& a, std::ostream& out, const Logger& log) {
  const LabeledCurves set = load_curve_dir(a.curves);
  const auto curves = maybe_unit_speed(set.curves, cfg);
  const KarcherResult r = karcher_mean(curves, cfg.params, karcher_options(cfg));
  log("mean: " + std::to_string(r.iterations) + " iterations, F=" +
      format_double(r.f_trace.back()));
  Json j = curve_to_json(r.mean);
  j["karcher"] = karcher_to_json(r);
  j["karcher"].erase("mean");
  j["labels"] = set.labels;
  write_json_or_print(a.out, j, out);
  if (!a.svg.empty()) {
    std::vector<Curve> shown = curves;
    shown.push_back(r.mean);
    write_text(a.svg, render_curves(shown, style_of(a), static_cast<int>(curves.size())));
  }
}

void cmd_distmat(const RunConfig& cfg, const Args& a, std::ostream& out,
                 const Logger& log) {
  const LabeledCurves set = load_curve_dir(a.curves);
  DistanceOptions o;
  o.bvp = bvp_options(cfg);
  o.jobs = cfg.jobs;
  o.cache_dir = cfg.cache_dir;
  const DistanceReport r =
      distance_matrix(maybe_unit_speed(set.curves, cfg), set.labels, cfg.params, o);
  log("distmat: " + std::to_string(r.pairs_solved) + " pairs solved, " +
      std::to_string(r.cache_hits) + " cache hits");
  write_or_print(a.out, distance_matrix_to_csv(r.matrix), out);
}

std::vector<Curve> geodesic_curves(const PcaResult& pca, const Args& a,
                                   const MetricParams& params, const RunConfig& cfg,
                                   int* bold) {
  const std::vector<double> times = parse_times(a.times);
  *bold = -1;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] == 0.0) *bold = static_cast<int>(k);
  return principal_geodesic(pca, a.component, times, params, cfg.steps, ivp_options(cfg));
}

void cmd_pca(const RunConfig& cfg, const Args& a, std::ostream& out) {
  const Curve mean = curve_from_json(read_json(a.mean));
  const LabeledCurves set = load_curve_dir(a.curves);
  const PcaResult pca = tangent_pca(mean, maybe_unit_speed(set.curves, cfg), cfg.params,
                                    karcher_options(cfg));
  Json j = pca_to_json(pca);
  j["labels"] = set.labels;
  j["params"] = params_to_json(cfg.params);
  write_json_or_print(a.out, j, out);
  if (!a.svg.empty()) {
    int bold = -1;
    const auto shown = geodesic_curves(pca, a, cfg.params, cfg, &bold);
    write_text(a.svg, render_curves(shown, style_of(a), bold));
  }
}

struct MdsCsv {
  Eigen::MatrixXd coords;
  std::vector<std::string> labels;
};

MdsCsv read_mds_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  MdsCsv out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    out.labels.push_back(cell);
    rows.emplace_back();
    while (std::getline(ls, cell, ',')) rows.back().push_back(std::stod(cell));
  }
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  out.coords.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) throw Error("ragged coordinate CSV '" + path + "'");
    for (std::size_t c = 0; c < dim; ++c)
      out.coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  return out;
}

void cmd_mds(const Args& a, std::ostream& out, std::ostream& err) {
  const DistanceMatrix dm = distance_matrix_from_csv(read_text(a.dm));
  if (a.dim != 2 && a.dim != 3) throw Error("--dim must be 2 or 3");
  const MdsResult r = classical_mds(dm, a.dim);
  if (r.padded)
    err << "curveshape: warning: fewer positive eigenvalues than dimensions; "
           "padded with zeros\n";
  std::string csv = "label";
  const char* axes[] = {"x", "y", "z"};
  for (int c = 0; c < a.dim; ++c) csv += std::string(",") + axes[c];
  csv += "\n";
  for (Eigen::Index i = 0; i < r.coords.rows(); ++i) {
    csv += dm.labels[static_cast<std::size_t>(i)];
    for (int c = 0; c < a.dim; ++c) csv += "," + format_double(r.coords(i, c));
    csv += "\n";
  }
  write_or_print(a.out, csv, out);
  if (!a.svg.empty())
    write_text(a.svg, render_scatter(r.coords, groups_of(dm.labels), dm.labels, style_of(a)));
}

void cmd_cluster(const RunConfig& cfg, const Args& a, std::ostream& out) {
  const DistanceMatrix dm = distance_matrix_from_csv(read_text(a.dm));
  const std::vector<int> labels = agglomerative_cluster(dm, a.k, parse_linkage(cfg.linkage));
  std::string csv = "label,cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    csv += dm.labels[i] + "," + std::to_string(labels[i]) + "\n";
  write_or_print(a.out, csv, out);
  if (a.purity)
    out << "purity " << format_double(clustering_purity(labels, groups_of(dm.labels)))
        << "\n";
}

void cmd_render(const RunConfig& cfg, const Args& a) {
  if (a.out.empty()) throw Error("render needs --out");
  const int sources = !a.curves.empty() + !a.path.empty() + !a.pca.empty() + !a.mds.empty();
  if (sources != 1) throw Error("give exactly one of --curves, --path, --pca or --mds");
  const SvgStyle style = style_of(a);
  std::string svg;
  if (!a.curves.empty()) {
    std::vector<Curve> curves;
    if (fs::is_directory(a.curves)) curves = load_curve_dir(a.curves).curves;
    else curves.push_back(curve_from_json(read_json(a.curves)));
    svg = render_curves(curves, style);
  } else if (!a.path.empty()) {
    const Json j = read_json(a.path);
    svg = render_path(path_from_json(j.contains("path") ? j.at("path") : j), a.snapshots,
                      style);
  } else if (!a.pca.empty()) {
    const Json j = read_json(a.pca);
    const PcaResult pca = pca_from_json(j);
    const MetricParams params = j.contains("params") ? params_from_json(j.at("params"))
                                                      : cfg.params;
    int bold = -1;
    const auto shown = geodesic_curves(pca, a, params, cfg, &bold);
    svg = render_curves(shown, style, bold);
  } else {
    const MdsCsv m = read_mds_csv(a.mds);
    svg = render_scatter(m.coords, groups_of(m.labels), m.labels, style);
  }
  write_text(a.out, svg);
}

void cmd_synth(const RunConfig& cfg, const Args& a) {
  if (a.out_dir.empty()) throw Error("synth needs --out-dir");
  SyntheticOptions o;
  o.per_group = a.per_group;
  o.samples = a.samples;
  o.noise = a.noise;
  o.seed = cfg.seed;
  const auto shapes = synthetic_dataset(o);
  const fs::path poly_dir = fs::path(a.out_dir) / "polylines";
  fs::create_directories(poly_dir);
  fs::path curve_dir;
  if (a.fit) {
    curve_dir = fs::path(a.out_dir) / "curves";
    fs::create_directories(curve_dir);
  }
  const SplineBasis basis =
      SplineBasis::make(cfg.space_degree, cfg.space_controls, SplineFlavor::periodic);
  for (const auto& s : shapes) {
    std::string text;
    for (Eigen::Index k = 0; k < s.polyline.rows(); ++k)
      text += format_double(s.polyline(k, 0)) + " " + format_double(s.polyline(k, 1)) + "\n";
    write_text((poly_dir / (s.label + ".txt")).string(), text);
    if (a.fit) {
      Curve c = fit_curve(s.polyline, basis, cfg.smoothing);
      if (cfg.unit_speed) c = constant_speed_reparam(c);
      write_json((curve_dir / (s.label + ".json")).string(), curve_to_json(c));
    }
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::vector<std::string> config_keys() { return keys(); }

void apply_config_value(RunConfig& c, const std::string& key, const Json& v) {
  if (key == "a0") assign(c.params.a0, v, key);
  else if (key == "a1") assign(c.params.a1, v, key);
  else if (key == "a2") assign(c.params.a2, v, key);
  else if (key == "scale_invariant") assign(c.params.scale_invariant, v, key);
  else if (key == "space_degree") assign(c.space_degree, v, key);
  else if (key == "space_controls") assign(c.space_controls, v, key);
  else if (key == "reparam_degree") assign(c.reparam_degree, v, key);
  else if (key == "reparam_controls") assign(c.reparam_controls, v, key);
  else if (key == "time_degree") assign(c.time_degree, v, key);
  else if (key == "time_controls") assign(c.time_controls, v, key);
  else if (key == "reparam") assign(c.reparam, v, key);
  else if (key == "rotation") assign(c.rotation, v, key);
  else if (key == "translation") assign(c.translation, v, key);
  else if (key == "unit_speed") assign(c.unit_speed, v, key);
  else if (key == "init") {
    assign(c.init, v, key);
    if (c.init != "circle" && c.init != "linear")
      throw Error("config key 'init': expected 'circle' or 'linear'");
  } else if (key == "alpha_starts") assign(c.alpha_starts, v, key);
  else if (key == "max_iter") assign(c.max_iter, v, key);
  else if (key == "gtol") assign(c.gtol, v, key);
  else if (key == "barrier_gap") assign(c.barrier_gap, v, key);
  else if (key == "steps") assign(c.steps, v, key);
  else if (key == "karcher_iter") assign(c.karcher_iter, v, key);
  else if (key == "karcher_tol") assign(c.karcher_tol, v, key);
  else if (key == "smoothing") assign(c.smoothing, v, key);
  else if (key == "linkage") {
    assign(c.linkage, v, key);
    parse_linkage(c.linkage);
  } else if (key == "cache_dir") assign(c.cache_dir, v, key);
  else if (key == "seed") assign(c.seed, v, key);
  else if (key == "jobs") assign(c.jobs, v, key);
  else if (key == "verbose") assign(c.verbose, v, key);
  else throw Error("unknown config key '" + key + "'");
}

void apply_config_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw Error("config must be a flat JSON object");
  for (const auto& [key, value] : j.items()) apply_config_value(c, key, value);
}

Json config_to_json(const RunConfig& c) {
  return Json{{"a0", c.params.a0},
              {"a1", c.params.a1},
              {"a2", c.params.a2},
              {"scale_invariant", c.params.scale_invariant},
              {"space_degree", c.space_degree},
              {"space_controls", c.space_controls},
              {"reparam_degree", c.reparam_degree},
              {"reparam_controls", c.reparam_controls},
              {"time_degree", c.time_degree},
              {"time_controls", c.time_controls},
              {"reparam", c.reparam},
              {"rotation", c.rotation},
              {"translation", c.translation},
              {"unit_speed", c.unit_speed},
              {"init", c.init},
              {"alpha_starts", c.alpha_starts},
              {"max_iter", c.max_iter},
              {"gtol", c.gtol},
              {"barrier_gap", c.barrier_gap},
              {"steps", c.steps},
              {"karcher_iter", c.karcher_iter},
              {"karcher_tol", c.karcher_tol},
              {"smoothing", c.smoothing},
              {"linkage", c.linkage},
              {"cache_dir", c.cache_dir},
              {"seed", c.seed},
              {"jobs", c.jobs},
              {"verbose", c.verbose}};
}

BvpOptions bvp_options(const RunConfig& c) {
  BvpOptions o;
  o.time_degree = c.time_degree;
  o.time_controls = c.time_controls;
  o.reparam_degree = c.reparam_degree;
  o.reparam_controls = c.reparam_controls;
  o.flags = {c.reparam && !c.unit_speed, c.rotation, c.translation};
  o.init = c.init == "linear" ? InitStrategy::linear : InitStrategy::via_circle;
  o.alpha_starts = c.alpha_starts;
  o.max_iter = c.max_iter;
  o.gtol = c.gtol;
  o.barrier_gap = c.barrier_gap;
  return o;
}

IvpOptions ivp_options(const RunConfig& c) {
  IvpOptions o;
  o.reparam_degree = c.reparam_degree;
  o.reparam_controls = c.reparam_controls;
  return o;
}

KarcherOptions karcher_options(const RunConfig& c) {
  KarcherOptions o;
  o.bvp = bvp_options(c);
  o.ivp = ivp_options(c);
  o.steps = c.steps;
  o.max_iter = c.karcher_iter;
  o.tol = c.karcher_tol;
  o.jobs = c.jobs;
  return o;
}

LabeledCurves load_curve_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no curve JSON files in '" + dir + "'");
  LabeledCurves out;
  for (const auto& f : files) {
    out.curves.push_back(curve_from_json(read_json(f.string())));
    out.labels.push_back(f.stem().string());
    if (!(out.curves.back().basis == out.curves.front().basis))
      throw Error("curve '" + f.string() + "' uses a different basis than '" +
                  files.front().string() + "'");
  }
  return out;
}

std::string group_of(const std::string& label) {
  const auto pos = label.rfind('_');
  return pos == std::string::npos ? label : label.substr(0, pos);
}

std::vector<EnergyBreakdown> calibration_breakdowns(const std::vector<Curve>& curves,
                                                    const SplineBasis& time_basis) {
  if (curves.size() < 2) throw Error("calibration needs at least two curves");
  const SplineBasis& space = curves.front().basis;
  const PathGrids grids = PathGrids::make(time_basis, space);
  const GrevilleInterpolator interp(space);
  const MetricParams unit;
  std::vector<EnergyBreakdown> out;
  for (std::size_t i = 0; i < curves.size(); ++i)
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const RigidMotion rigid = procrustes_align(evaluate(curves[j], interp.sites(), 0),
                                                 evaluate(curves[i], interp.sites(), 0),
                                                 true, true);
      const Curve target =
          apply_boundary_transform(curves[j], Reparam::identity(space), rigid);
      const double gap = (target.controls - curves[i].controls).cwiseAbs().maxCoeff();
      if (gap <= 1e-10 * curve_diameter(curves[i])) continue;
      const Path path = initial_path(curves[i], target, InitStrategy::linear, time_basis);
      out.push_back(path_energy(path, unit, grids).breakdown);
    }
  if (out.empty())
    throw Error("degenerate calibration set: all curves coincide up to rigid motion");
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shape analysis of closed planar curves under Sobolev metrics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  app.add_option("--config", config_file, "Flat JSON run configuration");
  std::string params_file;
  app.add_option("--params", params_file, "Metric parameter JSON (a0, a1, a2)");
  std::map<std::string, std::string> cli_values;
  std::map<std::string, bool> cli_flags;
  const RunConfig defaults;
  const Json default_json = config_to_json(defaults);
  for (const auto& key : keys()) {
    if (default_json.at(key).is_boolean()) continue;
    app.add_option("--" + dashed(key), cli_values[key],
                   "Overrides config key '" + key + "'");
  }
  app.add_flag("--verbose", cli_flags["verbose"], "Progress messages on stderr");
  app.add_flag("--scale-invariant", cli_flags["scale_invariant"], "Length-weighted metric");
  app.add_flag("--unit-speed", cli_flags["unit_speed"],
               "Constant-speed inputs without reparametrization");
  bool no_reparam = false, no_rotation = false, no_translation = false;
  app.add_flag("--no-reparam", no_reparam, "Keep the target parametrization fixed");
  app.add_flag("--no-rotation", no_rotation, "Do not optimize over rotations");
  app.add_flag("--no-translation", no_translation, "Do not optimize over translations");

  Args a;
  auto* fit = app.add_subcommand("fit", "Fit a spline curve to an image or polyline");
  fit->add_option("--image", a.image, "Binary image (PNG, PGM or 0/1 text)");
  fit->add_option("--polyline", a.polyline, "Text file with one 'x y' pair per line");
  fit->add_flag("--invert", a.invert, "Treat dark pixels as foreground");
  fit->add_option("--out", a.out, "Output curve JSON");

  auto* cal = app.add_subcommand("calibrate", "Balance the metric weights on a data set");
  cal->add_option("--curves", a.curves, "Directory of curve JSON files")->required();
  cal->add_option("--mode", a.mode, "balanced or total_100");
  cal->add_option("--out", a.out, "Output parameter JSON");

  auto* geo = app.add_subcommand("geodesic", "Solve the geodesic boundary value problem");
  geo->add_option("--c0", a.c0, "Start curve JSON")->required();
  geo->add_option("--c1", a.c1, "Target curve JSON")->required();
  geo->add_option("--out", a.out, "Output result JSON");
  geo->add_option("--svg", a.svg, "Path snapshots as SVG");
  geo->add_option("--snapshots", a.snapshots, "Number of SVG snapshots");
  geo->add_option("--velocity-out", a.velocity_out, "Horizontal initial velocity JSON");

  auto* ex = app.add_subcommand("exp", "Shoot a discrete geodesic");
  ex->add_option("--c0", a.c0, "Start curve JSON")->required();
  ex->add_option("--velocity", a.velocity, "Initial velocity JSON")->required();
  ex->add_option("--out", a.out, "Output geodesic JSON");
  ex->add_option("--svg", a.svg, "Snapshots as SVG");
  ex->add_option("--snapshots", a.snapshots, "Number of SVG snapshots");

  auto* mean = app.add_subcommand("mean", "Karcher mean of a set of curves");
  mean->add_option("--curves", a.curves, "Directory of curve JSON files")->required();
  mean->add_option("--out", a.out, "Output mean curve JSON");
  mean->add_option("--svg", a.svg, "Curves with the mean in bold");

  auto* dist = app.add_subcommand("distmat", "Pairwise geodesic distance matrix");
  dist->add_option("--curves", a.curves, "Directory of curve JSON files")->required();
  dist->add_option("--out", a.out, "Output CSV");

  auto* pca = app.add_subcommand("pca", "Tangent PCA at a mean shape");
  pca->add_option("--mean", a.mean, "Mean curve JSON")->required();
  pca->add_option("--curves", a.curves, "Directory of curve JSON files")->required();
  pca->add_option("--out", a.out, "Output PCA JSON");
  pca->add_option("--svg", a.svg, "Principal geodesic as SVG");
  pca->add_option("--component", a.component, "Principal direction for the SVG");
  pca->add_option("--times", a.times, "Comma separated times in standard deviations");

  auto* mds = app.add_subcommand("mds", "Classical multidimensional scaling");
  mds->add_option("--dm", a.dm, "Distance matrix CSV")->required();
  mds->add_option("--dim", a.dim, "Embedding dimension (2 or 3)");
  mds->add_option("--out", a.out, "Output coordinate CSV");
  mds->add_option("--svg", a.svg, "Scatter plot SVG");

  auto* cl = app.add_subcommand("cluster", "Agglomerative clustering");
  cl->add_option("--dm", a.dm, "Distance matrix CSV")->required();
  cl->add_option("--k", a.k, "Number of clusters");
  cl->add_option("--out", a.out, "Output label CSV");
  cl->add_flag("--purity", a.purity, "Report purity against label prefixes");

  auto* render = app.add_subcommand("render", "Draw curves, paths, PCA or MDS as SVG");
  render->add_option("--curves", a.curves, "Curve JSON file or directory");
  render->add_option("--path", a.path, "Geodesic result or path JSON");
  render->add_option("--pca", a.pca, "PCA JSON");
  render->add_option("--mds", a.mds, "Coordinate CSV");
  render->add_option("--component", a.component, "Principal direction");
  render->add_option("--times", a.times, "Comma separated times in standard deviations");
  render->add_option("--snapshots", a.snapshots, "Number of path snapshots");
  render->add_option("--out", a.out, "Output SVG");

  auto* synth = app.add_subcommand("synth", "Write the four-group synthetic data set");
  synth->add_option("--out-dir", a.out_dir, "Output directory");
  synth->add_option("--per-group", a.per_group, "Shapes per group");
  synth->add_option("--samples", a.samples, "Points per polyline");
  synth->add_option("--noise", a.noise, "Radial perturbation amplitude");
  synth->add_flag("--fit", a.fit, "Also write fitted curve JSON files");

  for (auto* sub : {geo, ex, mean, pca, render}) {
    sub->add_option("--width", a.width, "SVG width");
    sub->add_option("--height", a.height, "SVG height");
    sub->add_option("--stroke", a.stroke, "SVG stroke width");
  }

  std::string command = "curveshape";
  try {
    app.parse(argc, argv);
    command = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    if (!config_file.empty()) apply_config_json(cfg, read_json(config_file));
    if (!params_file.empty()) {
      const MetricParams p = params_from_json(read_json(params_file));
      cfg.params = p;
    }
    for (const auto& [key, text] : cli_values)
      if (app.count("--" + dashed(key)) > 0) apply_config_value(cfg, key, cli_value(text));
    for (const auto& [key, set] : cli_flags)
      if (set) apply_config_value(cfg, key, true);
    if (no_reparam) cfg.reparam = false;
    if (no_rotation) cfg.rotation = false;
    if (no_translation) cfg.translation = false;
    cfg.params.validate();
    if (cfg.jobs < 1) throw Error("--jobs must be positive");
    const Logger log{cfg.verbose, err};

    if (command == "fit") cmd_fit(cfg, a, out);
    else if (command == "calibrate") cmd_calibrate(cfg, a, out);
    else if (command == "geodesic") cmd_geodesic(cfg, a, out, log);
    else if (command == "exp") cmd_exp(cfg, a, out);
    else if (command == "mean") cmd_mean(cfg, a, out, log);
    else if (command == "distmat") cmd_distmat(cfg, a, out, log);
    else if (command == "pca") cmd_pca(cfg, a, out);
    else if (command == "mds") cmd_mds(a, out, err);
    else if (command == "cluster") cmd_cluster(cfg, a, out);
    else if (command == "render") cmd_render(cfg, a);
    else if (command == "synth") cmd_synth(cfg, a);
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << Json{{"error", one_line(e.what())}, {"command", command}, {"kind", "usage"}}.dump()
        << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << Json{{"error", one_line(e.what())}, {"command", command}}.dump() << "\n";
    return 1;
  }
}

}  // namespace curveshape
