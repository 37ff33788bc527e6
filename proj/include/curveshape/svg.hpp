#pragma once

#include <string>
#include <vector>

#include "curveshape/curve.hpp"

namespace curveshape {

struct SvgStyle {
  int width = 640;
  int height = 640;
  double stroke_width = 1.5;
  /// Points per closed polyline.
  int samples = 200;
};

/// Overlaid closed polylines; the curve at `bold_index` (if any) is drawn
/// with a heavier stroke.
std::string render_curves(const std::vector<Curve>& curves, const SvgStyle& style = {},
                          int bold_index = -1);

/// `snapshots` curves of the path at evenly spaced times in [0, 1].
std::string render_path(const Path& path, int snapshots, const SvgStyle& style = {});

/// Scatter of the first two coordinate columns with one marker glyph per
/// group.
std::string render_scatter(const Eigen::MatrixXd& coords, const std::vector<int>& groups,
                           const std::vector<std::string>& labels,
                           const SvgStyle& style = {});

}  // namespace curveshape
