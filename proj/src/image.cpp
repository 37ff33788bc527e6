#include <png.h>

#include <cctype>
#include <fstream>
#include <sstream>

#include "curveshape/contour.hpp"

namespace curveshape {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + i])) !=
        suffix[i])
      return false;
  return true;
}

// Next whitespace-separated PGM header token, skipping '#' comments.
std::string pgm_token(const std::string& data, std::size_t& pos) {
  while (pos < data.size()) {
    if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])))
    ++pos;
  return data.substr(start, pos - start);
}

BinaryImage read_pgm(const std::string& data, bool invert) {
  std::size_t pos = 0;
  const std::string magic = pgm_token(data, pos);
  if (magic != "P2" && magic != "P5") throw Error("unsupported PGM variant");
  const int cols = std::stoi(pgm_token(data, pos));
  const int rows = std::stoi(pgm_token(data, pos));
  const int maxval = std::stoi(pgm_token(data, pos));
  if (cols <= 0 || rows <= 0 || maxval <= 0) throw Error("malformed PGM header");
  BinaryImage img(rows, cols);
  const double half = 0.5 * maxval;
  if (magic == "P2") {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const std::string tok = pgm_token(data, pos);
        if (tok.empty()) throw Error("truncated PGM data");
        img.set(r, c, (std::stoi(tok) > half) != invert);
      }
    return img;
  }
  ++pos;  // single whitespace after maxval
  const int bytes = maxval > 255 ? 2 : 1;
  if (data.size() < pos + static_cast<std::size_t>(rows) * cols * bytes)
    throw Error("truncated PGM data");
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = pos + (static_cast<std::size_t>(r) * cols + c) * bytes;
      int v = static_cast<unsigned char>(data[i]);
      if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(data[i + 1]);
      img.set(r, c, (v > half) != invert);
    }
  return img;
}

BinaryImage read_png(const std::string& path, bool invert) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error("cannot decode PNG '" + path + "': " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error("cannot decode PNG '" + path + "': " + image.message);
  }
  const int rows = static_cast<int>(image.height);
  const int cols = static_cast<int>(image.width);
  BinaryImage img(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      img.set(r, c, (buffer[static_cast<std::size_t>(r) * cols + c] > 127) != invert);
  return img;
}

}  // namespace

BinaryImage parse_text_mask(const std::string& text) {
  std::vector<std::vector<bool>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<bool> row;
    for (char ch : line) {
      if (ch == '0' || ch == '1') {
        row.push_back(ch == '1');
      } else if (!std::isspace(static_cast<unsigned char>(ch)) && ch != ',') {
        throw Error(std::string("unexpected character '") + ch + "' in mask");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) return BinaryImage();
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) throw Error("mask rows have different lengths");
  BinaryImage img(static_cast<int>(rows.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      img.set(static_cast<int>(r), static_cast<int>(c), rows[r][c]);
  return img;
}

BinaryImage read_binary_image(const std::string& path, bool invert) {
  if (has_suffix(path, ".png")) return read_png(path, invert);
  const std::string data = read_file(path);
  if (data.size() >= 2 && data[0] == 'P' && (data[1] == '2' || data[1] == '5'))
    return read_pgm(data, invert);
  BinaryImage img = parse_text_mask(data);
  if (invert)
    for (int r = 0; r < img.rows(); ++r)
      for (int c = 0; c < img.cols(); ++c) img.set(r, c, !img(r, c));
  return img;
}

}  // namespace curveshape
