#pragma once

// Grayscale images on [0,1]: binary PGM I/O, PSNR, a Shepp-Logan phantom and
// seeded Gaussian noise.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <stdexcept>
#include <string>

#include "leapssn/linalg.hpp"
#include "leapssn/rng.hpp"

namespace leapssn {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Row-major pixels, row 0 at the top.
struct GridImage {
  int width = 0;
  int height = 0;
  Vector pixels;

  GridImage() = default;
  GridImage(int w, int h, Vector px) : width(w), height(h), pixels(std::move(px)) {
    require(w > 0 && h > 0, "GridImage: dimensions must be positive");
    require(pixels.size() == static_cast<Index>(w) * h, "GridImage: pixel count mismatch");
  }
  GridImage(int w, int h) : GridImage(w, h, Vector::Zero(static_cast<Index>(w) * h)) {}

  Index size() const { return pixels.size(); }
  double& at(int i, int j) { return pixels[static_cast<Index>(j) * width + i]; }
  double at(int i, int j) const { return pixels[static_cast<Index>(j) * width + i]; }
};

inline GridImage clamped(GridImage img) {
  img.pixels = img.pixels.cwiseMax(0.0).cwiseMin(1.0);
  return img;
}

namespace detail {

inline long read_pgm_int(std::istream& in) {
  int c = in.get();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (!in || !std::isdigit(c)) throw IoError("PGM: malformed header");
  long v = 0;
  while (in && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1000000) throw IoError("PGM: header value too large");
    c = in.get();
  }
  if (!in || !std::isspace(c)) throw IoError("PGM: malformed header");
  return v;
}

}  // namespace detail

/// Binary P5 reader; maxval up to 65535, mapped linearly to [0,1].
inline GridImage read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw IoError("PGM: expected binary P5 magic");
  const long w = detail::read_pgm_int(in);
  const long h = detail::read_pgm_int(in);
  const long maxval = detail::read_pgm_int(in);
  if (w <= 0 || h <= 0) throw IoError("PGM: nonpositive dimensions");
  if (maxval <= 0 || maxval > 65535) throw IoError("PGM: maxval out of range");
  const int bytes = maxval > 255 ? 2 : 1;
  const Index n = static_cast<Index>(w) * h;
  GridImage img(static_cast<int>(w), static_cast<int>(h));
  for (Index k = 0; k < n; ++k) {
    long v = 0;
    for (int b = 0; b < bytes; ++b) {
      const int c = in.get();
      if (c == std::char_traits<char>::eof()) throw IoError("PGM: truncated pixel data");
      v = (v << 8) | (c & 0xFF);
    }
    img.pixels[k] = std::min(1.0, static_cast<double>(v) / static_cast<double>(maxval));
  }
  return img;
}

inline GridImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_pgm(in);
}

/// Binary P5 writer, maxval 255, values clamped to [0,1] and rounded.
inline void write_pgm(std::ostream& out, const GridImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  for (Index k = 0; k < img.size(); ++k) {
    const double v = std::clamp(img.pixels[k], 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  if (!out) throw IoError("PGM: write failed");
}

inline void write_pgm(const std::string& path, const GridImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_pgm(out, img);
}

/// 10 log10(|Omega| / sum_i h^2 (u_i - g_i)^2) on the unit square, i.e.
/// 10 log10(1 / mean squared error). +inf when u == g.
inline double psnr(const GridImage& u, const GridImage& g) {
  require(u.width == g.width && u.height == g.height, "psnr: image dimensions differ");
  const double mse = (u.pixels - g.pixels).squaredNorm() / static_cast<double>(u.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

/// Modified Shepp-Logan phantom sampled at pixel centres of [-1,1]^2, values
/// clamped to [0,1].
inline GridImage shepp_logan(int width, int height) {
  struct Ellipse {
    double value, a, b, x0, y0, phi_deg;
  };
  static constexpr std::array<Ellipse, 10> kEllipses{{
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
      {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
      {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
      {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
      {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  }};
  GridImage img(width, height);
  for (int j = 0; j < height; ++j) {
    const double y = 1.0 - (j + 0.5) * 2.0 / height;
    for (int i = 0; i < width; ++i) {
      const double x = -1.0 + (i + 0.5) * 2.0 / width;
      double v = 0.0;
      for (const Ellipse& e : kEllipses) {
        const double phi = e.phi_deg * 3.14159265358979323846 / 180.0;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const double xr = (x - e.x0) * c + (y - e.y0) * s;
        const double yr = -(x - e.x0) * s + (y - e.y0) * c;
        if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0) v += e.value;
      }
      img.at(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

/// omega = g + sigma * eta with eta standard normal, row-major draw order.
/// Not clamped.
inline GridImage add_gaussian_noise(const GridImage& g, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0, "add_gaussian_noise: sigma must be nonnegative");
  SplitMix64 rng(seed);
  GridImage out = g;
  for (Index k = 0; k < out.size(); ++k) out.pixels[k] += sigma * rng.normal();
  return out;
}

}  // namespace leapssn
