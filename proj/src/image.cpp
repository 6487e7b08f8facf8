#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "siren/experiments.hpp"

namespace siren {

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

std::size_t header_number(std::istream& in, const std::string& path) {
  const std::string tok = header_token(in);
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("read_pgm: bad header in " + path);
  }
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  const std::string magic = header_token(in);
  if (magic != "P5" && magic != "P2") throw std::runtime_error("read_pgm: not a PGM file: " + path);
  GrayImage img;
  img.width = header_number(in, path);
  img.height = header_number(in, path);
  const std::size_t maxval = header_number(in, path);
  if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 65535) {
    throw std::runtime_error("read_pgm: bad dimensions or maxval in " + path);
  }
  const std::size_t n = img.width * img.height;
  img.pixels.resize(n);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t v = 0;
      if (!(in >> v) || v > maxval) throw std::runtime_error("read_pgm: truncated data in " + path);
      img.pixels[i] = static_cast<double>(v) * scale;
    }
  } else {
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw std::runtime_error("read_pgm: truncated data in " + path);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v = bytes == 1 ? raw[i] : (std::size_t{raw[2 * i]} << 8) | raw[2 * i + 1];
      img.pixels[i] = static_cast<double>(std::min(v, maxval)) * scale;
    }
  }
  return img;
}

void write_pgm(const GrayImage& image, const std::string& path) {
  if (image.pixels.size() != image.width * image.height) {
    throw std::invalid_argument("write_pgm: pixel count does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  for (double v : image.pixels) {
    const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

Matrix grid_coordinates(std::size_t side) {
  if (side < 2) throw std::invalid_argument("grid_coordinates: side must be >= 2");
  Matrix m(side * side, 2);
  const double step = 2.0 / static_cast<double>(side - 1);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      m(r * side + c, 0) = -1.0 + step * static_cast<double>(c);
      m(r * side + c, 1) = -1.0 + step * static_cast<double>(r);
    }
  }
  return m;
}

GrayImage render(const std::function<double(double, double)>& fn, std::size_t side) {
  const Matrix xy = grid_coordinates(side);
  GrayImage img{side, side, Vector(side * side)};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = fn(xy(i, 0), xy(i, 1));
  return img;
}

double sample_bilinear(const GrayImage& image, double x, double y) {
  if (image.width < 2 || image.height < 2) throw std::invalid_argument("sample_bilinear: image too small");
  const double fx = std::clamp((x + 1.0) * 0.5, 0.0, 1.0) * static_cast<double>(image.width - 1);
  const double fy = std::clamp((y + 1.0) * 0.5, 0.0, 1.0) * static_cast<double>(image.height - 1);
  const std::size_t c0 = std::min(static_cast<std::size_t>(fx), image.width - 2);
  const std::size_t r0 = std::min(static_cast<std::size_t>(fy), image.height - 2);
  const double tx = fx - static_cast<double>(c0), ty = fy - static_cast<double>(r0);
  const double top = (1 - tx) * image.at(r0, c0) + tx * image.at(r0, c0 + 1);
  const double bot = (1 - tx) * image.at(r0 + 1, c0) + tx * image.at(r0 + 1, c0 + 1);
  return (1 - ty) * top + ty * bot;
}

}  // namespace siren
