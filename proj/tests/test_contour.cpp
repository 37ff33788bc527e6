#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "curveshape/contour.hpp"
#include "oracle.hpp"

using namespace curveshape;

TEST_CASE("empty image has no contour") {
  BinaryImage img(10, 10);
  CHECK_THROWS_WITH_AS(extract_contour(img), doctest::Contains("no contour"), Error);
}

TEST_CASE("single pixel gives a four point loop around it") {
  BinaryImage img(5, 5);
  img.set(2, 3, true);
  const Points p = extract_contour(img);
  REQUIRE(p.rows() == 4);
  const Vec2 center(3.0, 5 - 1 - 2);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const Vec2 d = p.row(i).transpose() - center;
    CHECK(d.cwiseAbs().maxCoeff() == doctest::Approx(0.5));
    CHECK(d.cwiseAbs().sum() == doctest::Approx(0.5));
  }
  CHECK(signed_area(p) > 0.0);
}

TEST_CASE("rasterized disk") {
  const double r = 40.0, cx = 50.3, cy = 49.6;
  const BinaryImage img = rasterize_disk(101, cx, cy, r);
  const Points p = extract_contour(img);
  CHECK(signed_area(p) > 0.0);
  CHECK(polyline_length(p) == doctest::Approx(2.0 * oracle::kPi * r).epsilon(0.02));
  // Rasterization maps the disk center to (cx, rows - 1 - cy).
  const Vec2 c(cx, img.rows() - 1 - cy);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double dist = (p.row(i).transpose() - c).norm();
    CHECK(std::abs(dist - r) <= 1.0);
  }
}

TEST_CASE("largest component is traced") {
  BinaryImage img(30, 30);
  for (int r = 2; r < 5; ++r)
    for (int c = 2; c < 5; ++c) img.set(r, c, true);
  for (int r = 10; r < 25; ++r)
    for (int c = 10; c < 25; ++c) img.set(r, c, true);
  const Points p = extract_contour(img, 0);
  double xmin = p.col(0).minCoeff(), xmax = p.col(0).maxCoeff();
  CHECK(xmin > 9.0);
  CHECK(xmax < 25.0);
  CHECK(signed_area(p) == doctest::Approx(15.0 * 15.0 - 4 * 0.125).epsilon(1e-12));
  CHECK(signed_area(extract_contour(img)) == doctest::Approx(224.5).epsilon(0.03));
}

TEST_CASE("text masks and files") {
  const BinaryImage img = parse_text_mask("000\n010\n000\n");
  CHECK(img.rows() == 3);
  CHECK(img.cols() == 3);
  CHECK(img.count() == 1);
  CHECK(img(1, 1));

  const auto dir = std::filesystem::temp_directory_path() / "curveshape_contour_test";
  std::filesystem::create_directories(dir);
  const auto pgm = dir / "mask.pgm";
  {
    std::ofstream f(pgm);
    f << "P2\n3 2\n255\n0 255 0\n0 255 255\n";
  }
  const BinaryImage g = read_binary_image(pgm.string());
  CHECK(g.count() == 3);
  CHECK(g(0, 1));
  const BinaryImage inv = read_binary_image(pgm.string(), true);
  CHECK(inv.count() == 3);
  CHECK(inv(0, 0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("polyline helpers") {
  Points sq(4, 2);
  sq << 0, 0, 1, 0, 1, 1, 0, 1;
  CHECK(signed_area(sq) == doctest::Approx(1.0));
  CHECK(polyline_length(sq) == doctest::Approx(4.0));
  CHECK(signed_area(sq.colwise().reverse()) == doctest::Approx(-1.0));
}
