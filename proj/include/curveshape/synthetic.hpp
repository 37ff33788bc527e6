#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curveshape/curve.hpp"

namespace curveshape {

enum class ShapeFamily { circle, ellipse, star, rounded_square };

inline constexpr int kNumShapeFamilies = 4;

const char* family_name(ShapeFamily family);

/// Closed polyline of a unit-size shape with `samples` points, before noise.
Points family_polyline(ShapeFamily family, int samples);

struct SyntheticShape {
  std::string label;
  int group = 0;
  Points polyline;
};

struct SyntheticOptions {
  int per_group = 5;
  int samples = 400;
  /// Amplitude of the random low-frequency radial perturbation.
  double noise = 0.02;
  /// Largest random scale deviation, as a fraction.
  double scale_jitter = 0.03;
  std::uint64_t seed = 1;
};

/// Four groups (circles, 2:1 ellipses, 3-lobed stars, rounded squares), each
/// member randomly perturbed, rotated and translated. Deterministic in the
/// seed.
std::vector<SyntheticShape> synthetic_dataset(const SyntheticOptions& options);

}  // namespace curveshape
