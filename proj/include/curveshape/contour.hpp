#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curveshape/curve.hpp"

namespace curveshape {

/// Row-major boolean raster; row 0 is the top of the image.
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool operator()(int r, int c) const { return data_[index(r, c)] != 0; }
  void set(int r, int c, bool v) { data_[index(r, c)] = v ? 1 : 0; }
  bool at_or_false(int r, int c) const {
    return r >= 0 && r < rows_ && c >= 0 && c < cols_ && (*this)(r, c);
  }
  std::size_t count() const;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Reads a PGM (P2/P5), PNG, or plain-text 0/1 matrix. Gray images are
/// thresholded at half intensity; bright pixels are foreground unless
/// `invert` is set.
BinaryImage read_binary_image(const std::string& path, bool invert = false);
BinaryImage parse_text_mask(const std::string& text);

/// Rasterized disk used by tests and examples.
BinaryImage rasterize_disk(int size, double cx, double cy, double radius);

/// Outer boundary of the largest 8-connected foreground component, traced
/// with marching squares at iso-level 0.5 over pixel centers. Points are in
/// (x = column, y = rows - 1 - row) coordinates, counterclockwise, without
/// repeated consecutive points. Loops of at least kMinSmoothedPoints points
/// are then filtered `smoothing_passes` times with the (1/4, 1/2, 1/4)
/// kernel to remove the pixel staircase. Throws "no contour" on empty input.
inline constexpr int kMinSmoothedPoints = 16;
inline constexpr int kDefaultContourSmoothing = 4;
Points extract_contour(const BinaryImage& image,
                       int smoothing_passes = kDefaultContourSmoothing);

/// Signed shoelace area of a closed polyline.
double signed_area(const Points& polyline);
double polyline_length(const Points& polyline);

}  // namespace curveshape
