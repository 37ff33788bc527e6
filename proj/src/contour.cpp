#include "curveshape/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace curveshape {

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1));
}

BinaryImage rasterize_disk(int size, double cx, double cy, double radius) {
  BinaryImage img(size, size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      img.set(r, c, std::hypot(c - cx, r - cy) <= radius);
  return img;
}

double signed_area(const Points& p) {
  double a = 0.0;
  const Eigen::Index n = p.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index l = (k + 1) % n;
    a += p(k, 0) * p(l, 1) - p(l, 0) * p(k, 1);
  }
  return 0.5 * a;
}

double polyline_length(const Points& p) {
  double len = 0.0;
  const Eigen::Index n = p.rows();
  for (Eigen::Index k = 0; k < n; ++k)
    len += (p.row((k + 1) % n) - p.row(k)).norm();
  return len;
}

namespace {

// Largest 8-connected component with its holes filled, padded by one pixel.
BinaryImage isolate_largest_component(const BinaryImage& image) {
  const int rows = image.rows() + 2, cols = image.cols() + 2;
  std::vector<int> label(static_cast<std::size_t>(rows) * cols, -1);
  auto at = [&](int r, int c) { return image.at_or_false(r - 1, c - 1); };
  int best = -1;
  std::size_t best_size = 0;
  int next = 0;
  std::deque<std::pair<int, int>> queue;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!at(r, c) || label[r * cols + c] >= 0) continue;
      std::size_t size = 0;
      label[r * cols + c] = next;
      queue.emplace_back(r, c);
      while (!queue.empty()) {
        const auto [pr, pc] = queue.front();
        queue.pop_front();
        ++size;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = pr + dr, nc = pc + dc;
            if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
            if (!at(nr, nc) || label[nr * cols + nc] >= 0) continue;
            label[nr * cols + nc] = next;
            queue.emplace_back(nr, nc);
          }
      }
      if (size > best_size) {
        best_size = size;
        best = next;
      }
      ++next;
    }
  }
  if (best < 0) throw Error("no contour: image has no foreground pixels");

  // Background reachable from the border through 4-neighbours stays outside.
  std::vector<std::uint8_t> outside(label.size(), 0);
  outside[0] = 1;
  queue.emplace_back(0, 0);
  while (!queue.empty()) {
    const auto [pr, pc] = queue.front();
    queue.pop_front();
    constexpr std::array<std::array<int, 2>, 4> kSteps{
        {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (const auto& s : kSteps) {
      const int nr = pr + s[0], nc = pc + s[1];
      if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
      const std::size_t i = static_cast<std::size_t>(nr) * cols + nc;
      if (outside[i] || label[i] == best) continue;
      outside[i] = 1;
      queue.emplace_back(nr, nc);
    }
  }
  BinaryImage out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out.set(r, c, !outside[r * cols + c]);
  return out;
}

}  // namespace

Points extract_contour(const BinaryImage& image, int smoothing_passes) {
  const BinaryImage img = isolate_largest_component(image);
  const int rows = img.rows(), cols = img.cols();

  // Edge-crossing ids: horizontal edge (r, c)-(r, c+1) and vertical edge
  // (r, c)-(r+1, c).
  auto h_edge = [&](int r, int c) { return 2 * (r * cols + c); };
  auto v_edge = [&](int r, int c) { return 2 * (r * cols + c) + 1; };
  auto edge_point = [&](int id) {
    const int cell = id / 2;
    const int r = cell / cols, c = cell % cols;
    return (id % 2 == 0) ? Vec2(c + 0.5, r) : Vec2(c, r + 0.5);
  };

  std::unordered_map<int, std::array<int, 2>> links;
  auto connect = [&](int a, int b) {
    auto add = [&](int from, int to) {
      auto [it, inserted] = links.try_emplace(from, std::array<int, 2>{-1, -1});
      auto& slot = it->second;
      (slot[0] < 0 ? slot[0] : slot[1]) = to;
    };
    add(a, b);
    add(b, a);
  };

  for (int r = 0; r + 1 < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) {
      const bool tl = img(r, c), tr = img(r, c + 1);
      const bool br = img(r + 1, c + 1), bl = img(r + 1, c);
      const int top = h_edge(r, c), bottom = h_edge(r + 1, c);
      const int left = v_edge(r, c), right = v_edge(r, c + 1);
      std::vector<int> crossings;
      if (tl != tr) crossings.push_back(top);
      if (tr != br) crossings.push_back(right);
      if (br != bl) crossings.push_back(bottom);
      if (bl != tl) crossings.push_back(left);
      if (crossings.size() == 2) {
        connect(crossings[0], crossings[1]);
      } else if (crossings.size() == 4) {
        // Saddle: the corner average 0.5 counts as inside, so the two
        // foreground corners stay joined through the cell center.
        if (tl) {
          connect(top, right);
          connect(bottom, left);
        } else {
          connect(left, top);
          connect(right, bottom);
        }
      }
    }
  }
  if (links.empty()) throw Error("no contour: boundary is empty");

  // Walk every loop and keep the one enclosing the largest area.
  std::unordered_map<int, bool> visited;
  Points best;
  double best_area = -1.0;
  std::vector<int> keys;
  keys.reserve(links.size());
  for (const auto& kv : links) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  for (int start : keys) {
    if (visited[start]) continue;
    std::vector<Vec2> loop;
    int prev = -1, cur = start;
    while (!visited[cur]) {
      visited[cur] = true;
      loop.push_back(edge_point(cur));
      const auto& nb = links.at(cur);
      const int nxt = (nb[0] != prev) ? nb[0] : nb[1];
      prev = cur;
      cur = nxt;
      if (cur < 0) break;
    }
    Points pts(static_cast<Eigen::Index>(loop.size()), 2);
    for (std::size_t k = 0; k < loop.size(); ++k) {
      // Unpad and flip rows so that y points up.
      pts(static_cast<Eigen::Index>(k), 0) = loop[k].x() - 1.0;
      pts(static_cast<Eigen::Index>(k), 1) =
          static_cast<double>(image.rows() - 1) - (loop[k].y() - 1.0);
    }
    const double area = std::abs(signed_area(pts));
    if (area > best_area) {
      best_area = area;
      best = pts;
    }
  }

  if (signed_area(best) < 0.0) best = best.colwise().reverse().eval();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < best.rows(); ++k) {
    const Eigen::Index prev_k = keep.empty() ? -1 : keep.back();
    if (prev_k >= 0 && (best.row(k) - best.row(prev_k)).norm() < 1e-12)
      continue;
    keep.push_back(k);
  }
  while (keep.size() > 1 &&
         (best.row(keep.back()) - best.row(keep.front())).norm() < 1e-12)
    keep.pop_back();
  Points out(static_cast<Eigen::Index>(keep.size()), 2);
  for (std::size_t k = 0; k < keep.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = best.row(keep[k]);
  if (out.rows() < kMinSmoothedPoints) return out;
  const Eigen::Index n = out.rows();
  for (int pass = 0; pass < smoothing_passes; ++pass) {
    Points next(n, 2);
    for (Eigen::Index k = 0; k < n; ++k)
      next.row(k) = 0.25 * out.row((k + n - 1) % n) + 0.5 * out.row(k) +
                    0.25 * out.row((k + 1) % n);
    out = next;
  }
  return out;
}

}  // namespace curveshape
