#include "curveshape/synthetic.hpp"

#include <cmath>
#include <random>

namespace curveshape {

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Counterclockwise radial profile r(theta) of each family.
double radius(ShapeFamily family, double t) {
  switch (family) {
    case ShapeFamily::circle:
      return 1.0;
    case ShapeFamily::ellipse: {
      const double a = 1.4, b = 0.7;
      return a * b / std::hypot(b * std::cos(t), a * std::sin(t));
    }
    case ShapeFamily::star:
      return 1.0 + 0.3 * std::cos(3.0 * t);
    case ShapeFamily::rounded_square: {
      const double p = 4.0;
      return std::pow(std::pow(std::abs(std::cos(t)), p) +
                          std::pow(std::abs(std::sin(t)), p),
                      -1.0 / p);
    }
  }
  return 1.0;
}

}  // namespace

const char* family_name(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::circle:
      return "circle";
    case ShapeFamily::ellipse:
      return "ellipse";
    case ShapeFamily::star:
      return "star";
    case ShapeFamily::rounded_square:
      return "square";
  }
  return "shape";
}

Points family_polyline(ShapeFamily family, int samples) {
  Points p(samples, 2);
  for (int k = 0; k < samples; ++k) {
    const double t = kTwoPi * k / samples;
    const double r = radius(family, t);
    p(k, 0) = r * std::cos(t);
    p(k, 1) = r * std::sin(t);
  }
  return p;
}

std::vector<SyntheticShape> synthetic_dataset(const SyntheticOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<SyntheticShape> out;
  for (int g = 0; g < kNumShapeFamilies; ++g) {
    const auto family = static_cast<ShapeFamily>(g);
    for (int m = 0; m < options.per_group; ++m) {
      // Harmonics 2..4 of the radial perturbation.
      double amp[3], phase[3];
      for (int h = 0; h < 3; ++h) {
        amp[h] = options.noise * unit(rng) / (h + 1);
        phase[h] = kTwoPi * 0.5 * (unit(rng) + 1.0);
      }
      const double scale = 1.0 + options.scale_jitter * unit(rng);
      const double rot = kTwoPi * 0.5 * (unit(rng) + 1.0);
      const Vec2 shift(unit(rng), unit(rng));
      const double c = std::cos(rot), s = std::sin(rot);

      SyntheticShape shape;
      shape.group = g;
      shape.label = std::string(family_name(family)) + "_" + std::to_string(m);
      shape.polyline.resize(options.samples, 2);
      for (int k = 0; k < options.samples; ++k) {
        const double t = kTwoPi * k / options.samples;
        double r = radius(family, t);
        for (int h = 0; h < 3; ++h) r *= 1.0 + amp[h] * std::cos((h + 2) * t + phase[h]);
        const double x = scale * r * std::cos(t), y = scale * r * std::sin(t);
        shape.polyline(k, 0) = c * x - s * y + shift.x();
        shape.polyline(k, 1) = s * x + c * y + shift.y();
      }
      out.push_back(std::move(shape));
    }
  }
  return out;
}

}  // namespace curveshape
