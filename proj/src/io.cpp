#include "curveshape/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace curveshape {

namespace {

Json points_to_json(const Points& p) {
  Json arr = Json::array();
  for (Eigen::Index k = 0; k < p.rows(); ++k) arr.push_back({p(k, 0), p(k, 1)});
  return arr;
}

Points points_from_json(const Json& arr) {
  Points p(static_cast<Eigen::Index>(arr.size()), 2);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const Json& pt = arr.at(k);
    if (!pt.is_array() || pt.size() != 2) throw Error("control points must be [x, y] pairs");
    p(static_cast<Eigen::Index>(k), 0) = pt.at(0).get<double>();
    p(static_cast<Eigen::Index>(k), 1) = pt.at(1).get<double>();
  }
  return p;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

SplineBasis periodic_from_json(const Json& j) {
  return SplineBasis::make(j.at("degree").get<int>(), j.at("num_controls").get<int>(),
                           SplineFlavor::periodic);
}

}  // namespace

Json curve_to_json(const Curve& c) {
  return Json{{"degree", c.basis.degree()},
              {"num_controls", c.basis.num_controls()},
              {"closed", true},
              {"controls", points_to_json(c.controls)}};
}

Curve curve_from_json(const Json& j) {
  try {
    if (j.contains("closed") && !j.at("closed").get<bool>())
      throw Error("open curves are not supported");
    Curve c{periodic_from_json(j), points_from_json(j.at("controls"))};
    if (c.controls.rows() != c.basis.num_controls())
      throw Error("curve JSON: num_controls does not match the control list");
    return c;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed curve JSON: ") + e.what());
  }
}

Json field_to_json(const TangentField& f) {
  return Json{{"degree", f.basis.degree()},
              {"num_controls", f.basis.num_controls()},
              {"closed", true},
              {"controls", points_to_json(f.controls)}};
}

TangentField field_from_json(const Json& j) {
  const Curve c = curve_from_json(j);
  return {c.basis, c.controls};
}

Json path_to_json(const Path& p) {
  Json rows = Json::array();
  for (int i = 0; i < p.time_controls(); ++i) rows.push_back(points_to_json(p.row(i)));
  return Json{{"degree", p.space_basis.degree()},
              {"num_controls", p.space_basis.num_controls()},
              {"closed", true},
              {"time_degree", p.time_basis.degree()},
              {"time_controls", p.time_basis.num_controls()},
              {"controls", rows}};
}

Path path_from_json(const Json& j) {
  try {
    Path p = Path::make(SplineBasis::make(j.at("time_degree").get<int>(),
                                          j.at("time_controls").get<int>(),
                                          SplineFlavor::clamped),
                        periodic_from_json(j));
    const Json& rows = j.at("controls");
    if (static_cast<int>(rows.size()) != p.time_controls())
      throw Error("path JSON: time_controls does not match the control rows");
    for (int i = 0; i < p.time_controls(); ++i) {
      const Points row = points_from_json(rows.at(static_cast<std::size_t>(i)));
      if (row.rows() != p.space_controls())
        throw Error("path JSON: row length does not match num_controls");
      p.set_row(i, row);
    }
    return p;
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed path JSON: ") + e.what());
  }
}

Json params_to_json(const MetricParams& p) {
  return Json{{"a0", p.a0}, {"a1", p.a1}, {"a2", p.a2},
              {"scale_invariant", p.scale_invariant}};
}

MetricParams params_from_json(const Json& j) {
  MetricParams p;
  try {
    p.a0 = j.at("a0").get<double>();
    p.a1 = j.at("a1").get<double>();
    p.a2 = j.at("a2").get<double>();
    p.scale_invariant = j.value("scale_invariant", false);
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed metric params JSON: ") + e.what());
  }
  p.validate();
  return p;
}

Json breakdown_to_json(const EnergyBreakdown& b) {
  return Json{{"e0", b.e0}, {"e1", b.e1}, {"e2", b.e2}};
}

Json reparam_to_json(const Reparam& r) {
  return Json{{"degree", r.basis.degree()},
              {"num_controls", r.basis.num_controls()},
              {"phi", vector_to_json(r.phi)},
              {"alpha", r.alpha}};
}

Json rigid_to_json(const RigidMotion& r) {
  return Json{{"beta", r.beta}, {"v", {r.v.x(), r.v.y()}}};
}

Json bvp_options_to_json(const BvpOptions& o) {
  return Json{{"time_degree", o.time_degree},
              {"time_controls", o.time_controls},
              {"reparam_degree", o.reparam_degree},
              {"reparam_controls", o.reparam_controls},
              {"reparam", o.flags.reparam},
              {"rotation", o.flags.rotation},
              {"translation", o.flags.translation},
              {"init", o.init == InitStrategy::linear ? "linear" : "circle"},
              {"alpha_starts", o.alpha_starts},
              {"max_iter", o.max_iter},
              {"gtol", o.gtol},
              {"xtol", o.xtol},
              {"ftol", o.ftol},
              {"mu_factor", o.mu_factor},
              {"mu_floor", o.mu_floor},
              {"barrier_gap", o.barrier_gap},
              {"space_quad_order", o.space_quad_order},
              {"time_quad_order", o.time_quad_order}};
}

Json geodesic_to_json(const GeodesicResult& r) {
  Json trace = Json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"stage", t.stage},
                     {"iteration", t.iteration},
                     {"objective", t.objective},
                     {"energy", t.energy},
                     {"mu", t.mu},
                     {"min_slack", t.min_slack},
                     {"step_norm", t.step_norm},
                     {"grad_norm", t.grad_norm}});
  return Json{{"path", path_to_json(r.path)},
              {"reparam", reparam_to_json(r.reparam)},
              {"rigid", rigid_to_json(r.rigid)},
              {"energy", r.energy},
              {"distance", r.distance},
              {"breakdown", breakdown_to_json(r.breakdown)},
              {"converged", r.converged},
              {"status", r.status},
              {"trace", trace}};
}

Json discrete_geodesic_to_json(const DiscreteGeodesic& g) {
  Json curves = Json::array();
  for (const auto& c : g.curves) curves.push_back(curve_to_json(c));
  return Json{{"steps", g.steps}, {"params", params_to_json(g.params)},
              {"curves", curves}};
}

Json pca_to_json(const PcaResult& p) {
  Json dirs = Json::array();
  for (const auto& d : p.directions) dirs.push_back(field_to_json(d));
  Json scores = Json::array();
  for (Eigen::Index i = 0; i < p.scores.rows(); ++i)
    scores.push_back(vector_to_json(p.scores.row(i).transpose()));
  return Json{{"base", curve_to_json(p.base)},
              {"eigenvalues", vector_to_json(p.eigenvalues)},
              {"explained", vector_to_json(p.explained)},
              {"directions", dirs},
              {"scores", scores}};
}

PcaResult pca_from_json(const Json& j) {
  PcaResult p;
  p.base = curve_from_json(j.at("base"));
  p.eigenvalues = vector_from_json(j.at("eigenvalues"));
  p.explained = vector_from_json(j.at("explained"));
  for (const auto& d : j.at("directions")) p.directions.push_back(field_from_json(d));
  const Json& s = j.at("scores");
  const Eigen::Index cols = p.eigenvalues.size();
  p.scores.resize(static_cast<Eigen::Index>(s.size()), cols);
  for (std::size_t i = 0; i < s.size(); ++i)
    p.scores.row(static_cast<Eigen::Index>(i)) = vector_from_json(s.at(i)).transpose();
  return p;
}

Json karcher_to_json(const KarcherResult& r) {
  return Json{{"mean", curve_to_json(r.mean)},
              {"f_trace", r.f_trace},
              {"step_norms", r.step_norms},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"stalled", r.stalled}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error("cannot parse JSON '" + path + "': " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string distance_matrix_to_csv(const DistanceMatrix& dm) {
  std::string out;
  for (std::size_t k = 0; k < dm.labels.size(); ++k) {
    if (k) out += ',';
    out += dm.labels[k];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < dm.d.rows(); ++i) {
    for (Eigen::Index j = 0; j < dm.d.cols(); ++j) {
      if (j) out += ',';
      out += format_double(dm.d(i, j));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

DistanceMatrix distance_matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("distance CSV is empty");
  DistanceMatrix dm;
  dm.labels = split_csv(line);
  const Eigen::Index n = static_cast<Eigen::Index>(dm.labels.size());
  dm.d.resize(n, n);
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (row >= n || static_cast<Eigen::Index>(cells.size()) != n)
      throw Error("distance CSV is not square");
    for (Eigen::Index j = 0; j < n; ++j) dm.d(row, j) = std::stod(cells[j]);
    ++row;
  }
  if (row != n) throw Error("distance CSV is not square");
  return dm;
}

Points parse_polyline(const std::string& text) {
  std::vector<double> vals;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    double x, y;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t\r")] == '#')
      continue;
    if (!(ls >> x >> y)) throw Error("polyline lines must hold two numbers");
    vals.push_back(x);
    vals.push_back(y);
  }
  Points p(static_cast<Eigen::Index>(vals.size() / 2), 2);
  for (std::size_t k = 0; k < vals.size() / 2; ++k) {
    p(static_cast<Eigen::Index>(k), 0) = vals[2 * k];
    p(static_cast<Eigen::Index>(k), 1) = vals[2 * k + 1];
  }
  return p;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace curveshape
