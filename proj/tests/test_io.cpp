#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "curveshape/io.hpp"

using namespace curveshape;

TEST_CASE("shortest round-trip doubles") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, 250.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(250.0) == "250");
}

TEST_CASE("curve and field json") {
  const auto b = SplineBasis::make(3, 9, SplineFlavor::periodic);
  const Curve c = make_ellipse(b, Vec2(0.1, 0.2), 1.0 / 3.0, 0.7);
  const Curve back = curve_from_json(curve_to_json(c));
  CHECK(back.basis == c.basis);
  CHECK((back.controls - c.controls).norm() == 0.0);
  const TangentField f{b, 0.5 * c.controls};
  CHECK((field_from_json(field_to_json(f)).controls - f.controls).norm() == 0.0);
  Json bad = curve_to_json(c);
  bad["controls"].erase(0);
  CHECK_THROWS(curve_from_json(bad));
}

TEST_CASE("params json") {
  const MetricParams p{1.0, 250.0, 0.004, true};
  CHECK(params_from_json(params_to_json(p)) == p);
  CHECK(params_from_json(Json::parse(params_to_json(p).dump())) == p);
  CHECK_THROWS(params_from_json(Json{{"a0", -1.0}, {"a1", 1.0}, {"a2", 1.0}}));
}

TEST_CASE("path json") {
  const auto tb = SplineBasis::make(2, 4, SplineFlavor::clamped);
  const auto sb = SplineBasis::make(3, 8, SplineFlavor::periodic);
  const Curve a = make_circle(sb, Vec2::Zero(), 1.0), c = make_circle(sb, Vec2(1, 0), 2.0);
  const Path p = initial_path(a, c, InitStrategy::linear, tb);
  const Path q = path_from_json(path_to_json(p));
  CHECK((q.x - p.x).norm() == 0.0);
  CHECK((q.y - p.y).norm() == 0.0);
  CHECK(q.time_basis == p.time_basis);
}

TEST_CASE("pca json") {
  const auto b = SplineBasis::make(3, 8, SplineFlavor::periodic);
  const Curve base = make_circle(b, Vec2::Zero(), 1.0);
  const std::vector<TangentField> v = {{b, 0.1 * base.controls}, {b, -0.2 * base.controls}, {b, 0.3 * base.controls}};
  const PcaResult pca = tangent_pca_from_velocities(base, v, {});
  const PcaResult back = pca_from_json(pca_to_json(pca));
  CHECK((back.eigenvalues - pca.eigenvalues).norm() == 0.0);
  CHECK((back.scores - pca.scores).norm() == 0.0);
  CHECK(back.directions.size() == pca.directions.size());
  CHECK((back.base.controls - pca.base.controls).norm() == 0.0);
}

TEST_CASE("distance matrix csv") {
  DistanceMatrix dm;
  dm.d.resize(2, 2);
  dm.d << 0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0;
  dm.labels = {"a_0", "b_1"};
  const std::string text = distance_matrix_to_csv(dm);
  CHECK(text.substr(0, 8) == "a_0,b_1\n");
  const DistanceMatrix back = distance_matrix_from_csv(text);
  CHECK(back.labels == dm.labels);
  CHECK((back.d - dm.d).norm() == 0.0);
  CHECK_THROWS(distance_matrix_from_csv("a,b\n0,1\n"));
}

TEST_CASE("polyline text") {
  const Points p = parse_polyline("# square\n0 0\n1,0\n\n1 1\n0 1\n");
  REQUIRE(p.rows() == 4);
  CHECK(p(1, 0) == 1.0);
  CHECK(p(3, 1) == 1.0);
  CHECK_THROWS(parse_polyline("0 0\n1 x\n"));
}

TEST_CASE("files and hashing") {
  const auto dir = std::filesystem::temp_directory_path() / "curveshape_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "x.json").string();
  write_json(path, Json{{"k", 0.1}});
  CHECK(read_text(path) == "{\n  \"k\": 0.1\n}\n");
  CHECK(read_json(path)["k"] == 0.1);
  CHECK_THROWS(read_json((dir / "missing.json").string()));
  std::filesystem::remove_all(dir);
  // Published FNV-1a test vectors.
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}
