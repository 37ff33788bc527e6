#include "curveshape/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace curveshape {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  // Avoid "-0.000".
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

// Maps data coordinates into the canvas with a uniform scale and a margin.
class Frame {
 public:
  Frame(const std::vector<Points>& sets, const SvgStyle& style) : style_(style) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& p : sets) {
      if (p.rows() == 0) continue;
      x0 = std::min(x0, p.col(0).minCoeff());
      x1 = std::max(x1, p.col(0).maxCoeff());
      y0 = std::min(y0, p.col(1).minCoeff());
      y1 = std::max(y1, p.col(1).maxCoeff());
    }
    if (!std::isfinite(x0)) x0 = x1 = y0 = y1 = 0.0;
    const double margin = 0.06 * std::min(style.width, style.height);
    const double span = std::max({x1 - x0, y1 - y0, 1e-12});
    scale_ = std::min(style.width - 2 * margin, style.height - 2 * margin) / span;
    cx_ = 0.5 * (x0 + x1);
    cy_ = 0.5 * (y0 + y1);
  }

  double x(double v) const { return 0.5 * style_.width + scale_ * (v - cx_); }
  double y(double v) const { return 0.5 * style_.height - scale_ * (v - cy_); }

 private:
  SvgStyle style_;
  double scale_ = 1.0, cx_ = 0.0, cy_ = 0.0;
};

std::string header(const SvgStyle& s) {
  const std::string w = std::to_string(s.width), h = std::to_string(s.height);
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
         "\" viewBox=\"0 0 " + w + " " + h + "\">\n<rect width=\"" + w + "\" height=\"" +
         h + "\" fill=\"white\"/>\n";
}

std::string polyline(const Points& p, const Frame& f, const char* color, double width) {
  std::string out = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                    "\" stroke-width=\"" + num(width) + "\" points=\"";
  for (Eigen::Index k = 0; k <= p.rows(); ++k) {
    const Eigen::Index i = k % p.rows();
    if (k) out += ' ';
    out += num(f.x(p(i, 0))) + "," + num(f.y(p(i, 1)));
  }
  return out + "\"/>\n";
}

std::string draw_curves(const std::vector<Points>& sets, const SvgStyle& style,
                        int bold_index, bool single_color) {
  const Frame frame(sets, style);
  std::string out = header(style);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (static_cast<int>(i) == bold_index) continue;
    const char* color = single_color ? "#1f77b4" : kPalette[i % 8];
    out += polyline(sets[i], frame, color, style.stroke_width);
  }
  if (bold_index >= 0 && bold_index < static_cast<int>(sets.size()))
    out += polyline(sets[static_cast<std::size_t>(bold_index)], frame, "#000000",
                    3.0 * style.stroke_width);
  return out + "</svg>\n";
}

}  // namespace

std::string render_curves(const std::vector<Curve>& curves, const SvgStyle& style,
                          int bold_index) {
  std::vector<Points> sets;
  for (const auto& c : curves) sets.push_back(sample_curve(c, style.samples));
  return draw_curves(sets, style, bold_index, bold_index >= 0);
}

std::string render_path(const Path& path, int snapshots, const SvgStyle& style) {
  if (snapshots < 1) throw Error("need at least one snapshot");
  std::vector<Points> sets;
  for (int k = 0; k < snapshots; ++k) {
    const double t = snapshots == 1 ? 0.0 : static_cast<double>(k) / (snapshots - 1);
    sets.push_back(sample_curve(path.slice(t), style.samples));
  }
  return draw_curves(sets, style, -1, false);
}

std::string render_scatter(const Eigen::MatrixXd& coords, const std::vector<int>& groups,
                           const std::vector<std::string>& labels,
                           const SvgStyle& style) {
  Points pts = Points::Zero(coords.rows(), 2);
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, coords.cols()); ++c)
    pts.col(c) = coords.col(c);
  const Frame frame({pts}, style);
  std::string out = header(style);
  const double r = 4.0 * style.stroke_width;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const int g = groups.empty() ? 0 : groups[static_cast<std::size_t>(i)];
    const char* color = kPalette[static_cast<std::size_t>(std::abs(g)) % 8];
    const double x = frame.x(pts(i, 0)), y = frame.y(pts(i, 1));
    const std::string fill = "fill=\"" + std::string(color) + "\"";
    switch (std::abs(g) % 4) {
      case 0:
        out += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) +
               "\" " + fill + "/>\n";
        break;
      case 1:
        out += "<rect x=\"" + num(x - r) + "\" y=\"" + num(y - r) + "\" width=\"" +
               num(2 * r) + "\" height=\"" + num(2 * r) + "\" " + fill + "/>\n";
        break;
      case 2:
        out += "<polygon points=\"" + num(x) + "," + num(y - r) + " " + num(x + r) + "," +
               num(y + r) + " " + num(x - r) + "," + num(y + r) + "\" " + fill + "/>\n";
        break;
      default:
        out += "<polygon points=\"" + num(x) + "," + num(y - r) + " " + num(x + r) + "," +
               num(y) + " " + num(x) + "," + num(y + r) + " " + num(x - r) + "," + num(y) +
               "\" " + fill + "/>\n";
        break;
    }
    if (!labels.empty())
      out += "<text x=\"" + num(x + 1.5 * r) + "\" y=\"" + num(y - 1.5 * r) +
             "\" font-size=\"10\" font-family=\"sans-serif\">" +
             labels[static_cast<std::size_t>(i)] + "</text>\n";
  }
  return out + "</svg>\n";
}

}  // namespace curveshape
