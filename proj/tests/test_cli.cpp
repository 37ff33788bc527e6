#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "curveshape/commands.hpp"
#include "curveshape/contour.hpp"

using namespace curveshape;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "curveshape");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("curveshape_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

void write_disk_pgm(const fs::path& file, int size, double r) {
  const BinaryImage img = rasterize_disk(size, size / 2.0, size / 2.0, r);
  std::ofstream f(file);
  f << "P2\n" << size << " " << size << "\n1\n";
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) f << (img(i, j) ? 1 : 0) << " ";
    f << "\n";
  }
}

const std::vector<std::string> kSmall = {"--space-controls", "16", "--time-controls", "5",
                                         "--reparam-controls", "16", "--alpha-starts", "1"};

std::vector<std::string> with_small(std::vector<std::string> args) {
  args.insert(args.begin(), kSmall.begin(), kSmall.end());
  return args;
}

}  // namespace

TEST_CASE("fit from an image and a polyline") {
  const fs::path dir = scratch("fit");
  write_disk_pgm(dir / "disk.pgm", 101, 40.0);
  const Run r = run({"fit", "--image", (dir / "disk.pgm").string(), "--out", (dir / "disk.json").string()});
  REQUIRE(r.code == 0);
  const Curve c = curve_from_json(read_json((dir / "disk.json").string()));
  CHECK(curve_length(c) == doctest::Approx(2.0 * 3.14159265358979 * 40.0).epsilon(0.02));

  write_text((dir / "sq.txt").string(), "0 0\n1 0\n2 0\n2 1\n2 2\n1 2\n0 2\n0 1\n");
  const Run s = run({"fit", "--polyline", (dir / "sq.txt").string(), "--out", (dir / "sq.json").string()});
  REQUIRE(s.code == 0);
  CHECK(check_regularity(curve_from_json(read_json((dir / "sq.json").string()))) > 0.0);

  write_text((dir / "empty.txt").string(), "000\n000\n");
  const Run e = run({"fit", "--image", (dir / "empty.txt").string(), "--out", (dir / "e.json").string()});
  CHECK(e.code != 0);
  CHECK(e.err.find("no contour") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("usage errors and configuration") {
  CHECK(run({"nosuchcommand"}).code == 2);
  CHECK(run({"--space-controls", "abc", "synth"}).code != 0);
  const fs::path dir = scratch("config");
  write_text((dir / "cfg.json").string(), "{\"bogus\": 1}\n");
  const Run bad = run({"--config", (dir / "cfg.json").string(), "synth", "--out-dir", dir.string()});
  CHECK(bad.code != 0);
  CHECK(bad.err.find("bogus") != std::string::npos);

  RunConfig cfg;
  apply_config_json(cfg, Json{{"space_controls", 40}, {"a2", 5.0}, {"linkage", "single"}});
  CHECK(cfg.space_controls == 40);
  CHECK(cfg.params.a2 == 5.0);
  CHECK(cfg.linkage == "single");
  CHECK_THROWS(apply_config_value(cfg, "space_controls", Json("x")));
  RunConfig round;
  apply_config_json(round, config_to_json(cfg));
  CHECK(config_to_json(round) == config_to_json(cfg));
  CHECK(group_of("star_12") == "star");
  fs::remove_all(dir);
}

TEST_CASE("calibrate rejects degenerate sets") {
  const fs::path dir = scratch("cal");
  fs::create_directories(dir / "curves");
  const auto b = SplineBasis::make(3, 16, SplineFlavor::periodic);
  const Curve c = make_circle(b, Vec2::Zero(), 1.0);
  write_json((dir / "curves" / "a_0.json").string(), curve_to_json(c));
  write_json((dir / "curves" / "a_1.json").string(), curve_to_json(c));
  const Run r = run({"--space-controls", "16", "calibrate", "--curves", (dir / "curves").string(),
                     "--out", (dir / "p.json").string()});
  CHECK(r.code != 0);

  Curve e = make_ellipse(b, Vec2::Zero(), 1.5, 0.7);
  write_json((dir / "curves" / "a_1.json").string(), curve_to_json(e));
  const Run ok = run({"--space-controls", "16", "calibrate", "--curves", (dir / "curves").string(),
                      "--out", (dir / "p.json").string()});
  REQUIRE(ok.code == 0);
  const Json j = read_json((dir / "p.json").string());
  const MetricParams p = params_from_json(j);
  CHECK(p.a0 == 1.0);
  fs::remove_all(dir);
}

TEST_CASE("geodesic, exp and render through the binary") {
  const fs::path dir = scratch("geo");
  const auto b = SplineBasis::make(3, 16, SplineFlavor::periodic);
  write_json((dir / "a.json").string(), curve_to_json(make_circle(b, Vec2::Zero(), 1.0)));
  write_json((dir / "b.json").string(), curve_to_json(make_ellipse(b, Vec2(0.5, 0.0), 1.4, 0.8)));
  const std::string exe = CURVESHAPE_CLI;
  auto shell = [&](const std::string& args) {
    return std::system((exe + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
  };
  const std::string small = "--space-controls 16 --time-controls 5 --reparam-controls 16 --alpha-starts 1 ";
  REQUIRE(shell(small + "geodesic --c0 " + (dir / "a.json").string() + " --c1 " + (dir / "b.json").string() +
                " --out " + (dir / "g.json").string() + " --velocity-out " + (dir / "v.json").string() +
                " --svg " + (dir / "g.svg").string() + " --snapshots 5") == 0);
  const Json g = read_json((dir / "g.json").string());
  CHECK(g["distance"].get<double>() > 0.0);
  CHECK(count(read_text((dir / "g.svg").string()), "<polyline") == 5);

  REQUIRE(shell(small + "exp --c0 " + (dir / "a.json").string() + " --velocity " + (dir / "v.json").string() +
                " --steps 6 --out " + (dir / "e.json").string()) == 0);
  CHECK(read_json((dir / "e.json").string())["curves"].size() == 7);

  REQUIRE(shell("render --curves " + (dir / "a.json").string() + " --out " + (dir / "c.svg").string()) == 0);
  CHECK(count(read_text((dir / "c.svg").string()), "<polyline") == 1);
  CHECK(shell("geodesic --c0 " + (dir / "missing.json").string() + " --c1 " + (dir / "b.json").string()) != 0);
  fs::remove_all(dir);
}

TEST_CASE("pipeline outputs are deterministic") {
  auto pipeline = [](const fs::path& dir) {
    REQUIRE(run(with_small({"synth", "--out-dir", dir.string(), "--per-group", "2", "--fit"})).code == 0);
    const std::string curves = (dir / "curves").string();
    REQUIRE(run(with_small({"distmat", "--curves", curves, "--out", (dir / "d.csv").string()})).code == 0);
    REQUIRE(run({"mds", "--dm", (dir / "d.csv").string(), "--out", (dir / "m.csv").string(),
                 "--svg", (dir / "m.svg").string()}).code == 0);
    const Run cl = run({"cluster", "--dm", (dir / "d.csv").string(), "--k", "4", "--out",
                        (dir / "k.csv").string(), "--purity"});
    REQUIRE(cl.code == 0);
    CHECK(cl.out.find("purity") != std::string::npos);
    REQUIRE(run({"render", "--curves", curves, "--out", (dir / "all.svg").string()}).code == 0);
    CHECK(count(read_text((dir / "all.svg").string()), "<polyline") == 8);
  };
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  pipeline(a);
  pipeline(b);
  for (const char* f : {"d.csv", "m.csv", "m.svg", "k.csv", "all.svg", "curves/star_1.json"})
    CHECK(read_text((a / f).string()) == read_text((b / f).string()));
  fs::remove_all(a);
  fs::remove_all(b);
}
