#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lungaug/core/error.hpp"
#include "lungaug/core/raster.hpp"

namespace lungaug {

// Dense inverse coordinate field: for every output pixel (x, y), the source
// position sampled from the input raster. Pixel centers sit on integer
// coordinates. One map is built per spatial application and drives both the
// image (bilinear) and the mask (nearest); positions outside the source
// read as 0.
class GeometricMap {
 public:
  GeometricMap() = default;
  GeometricMap(int width, int height)
      : width_(width),
        height_(height),
        src_x_(static_cast<std::size_t>(width) * height),
        src_y_(static_cast<std::size_t>(width) * height) {
    if (width <= 0 || height <= 0) throw validation_error("GeometricMap: bad dimensions");
  }

  static GeometricMap identity(int width, int height) {
    GeometricMap m(width, height);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) m.set(x, y, static_cast<float>(x), static_cast<float>(y));
    return m;
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  float src_x(int x, int y) const noexcept { return src_x_[index(x, y)]; }
  float src_y(int x, int y) const noexcept { return src_y_[index(x, y)]; }

  void set(int x, int y, float sx, float sy) noexcept {
    src_x_[index(x, y)] = sx;
    src_y_[index(x, y)] = sy;
  }

  bool all_finite() const noexcept {
    for (std::size_t i = 0; i < src_x_.size(); ++i)
      if (!std::isfinite(src_x_[i]) || !std::isfinite(src_y_[i])) return false;
    return true;
  }

  friend bool operator==(const GeometricMap&, const GeometricMap&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> src_x_;
  std::vector<float> src_y_;
};

// 2x3 affine matrix mapping output coordinates to source coordinates.
using InverseAffine = std::array<double, 6>;

inline GeometricMap map_from_affine(int width, int height, const InverseAffine& m) {
  GeometricMap out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double sx = m[0] * x + m[1] * y + m[2];
      const double sy = m[3] * x + m[4] * y + m[5];
      out.set(x, y, static_cast<float>(sx), static_cast<float>(sy));
    }
  }
  return out;
}

// sin/cos of an angle in degrees, exact at multiples of 90.
inline std::pair<double, double> sincos_degrees(double degrees) {
  const double q = degrees / 90.0;
  if (q == std::floor(q) && std::abs(q) < 1e9) {
    static constexpr double s[4] = {0.0, 1.0, 0.0, -1.0};
    static constexpr double c[4] = {1.0, 0.0, -1.0, 0.0};
    const auto idx = static_cast<int>(((static_cast<long long>(q) % 4) + 4) % 4);
    return {s[idx], c[idx]};
  }
  const double r = degrees * std::numbers::pi / 180.0;
  return {std::sin(r), std::cos(r)};
}

// Forward model: p' = c + t + scale * R(angle) * (p - c), c = image center,
// angle in degrees, positive angles turn the picture clockwise on screen
// (y axis pointing down). Returns the inverse used for resampling.
inline InverseAffine shift_scale_rotate_inverse(int width, int height, double shift_x_px,
                                                double shift_y_px, double scale, double angle) {
  if (!(scale > 0.0)) throw validation_error("shift_scale_rotate: scale must be positive");
  const double cx = (width - 1) * 0.5;
  const double cy = (height - 1) * 0.5;
  const auto [s, c] = sincos_degrees(angle);
  // p = c + R(-angle) * (p' - c - t) / scale
  const double a = c / scale, b = s / scale;
  const double tx = cx + shift_x_px, ty = cy + shift_y_px;
  return {a, b, cx - a * tx - b * ty, -b, a, cy + b * tx - a * ty};
}

inline std::uint8_t saturate_round(double v) noexcept {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

inline Image remap_bilinear(const Image& src, const GeometricMap& map) {
  Image out(map.width(), map.height());
  const int w = src.width(), h = src.height();
  auto at = [&](int x, int y) -> double {
    return (x >= 0 && y >= 0 && x < w && y < h) ? src(x, y) : 0.0;
  };
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double sx = map.src_x(x, y);
      const double sy = map.src_y(x, y);
      if (!(sx > -1.0 && sy > -1.0 && sx < w && sy < h)) {
        out(x, y) = 0;
        continue;
      }
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
      const double ax = sx - fx0, ay = sy - fy0;
      const double top = at(x0, y0) + (at(x0 + 1, y0) - at(x0, y0)) * ax;
      const double bottom = at(x0, y0 + 1) + (at(x0 + 1, y0 + 1) - at(x0, y0 + 1)) * ax;
      out(x, y) = saturate_round(top + (bottom - top) * ay);
    }
  }
  return out;
}

inline Mask remap_nearest(const Mask& src, const GeometricMap& map) {
  Mask out(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const double sx = std::floor(static_cast<double>(map.src_x(x, y)) + 0.5);
      const double sy = std::floor(static_cast<double>(map.src_y(x, y)) + 0.5);
      if (sx >= 0 && sy >= 0 && sx < src.width() && sy < src.height()) {
        out(x, y) = src(static_cast<int>(sx), static_cast<int>(sy));
      } else {
        out(x, y) = 0;
      }
    }
  }
  return out;
}

// Integer-exact mirror along the chosen axes.
inline GeometricMap flip_map(int width, int height, bool horizontal, bool vertical) {
  GeometricMap m(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      m.set(x, y, static_cast<float>(horizontal ? width - 1 - x : x),
            static_cast<float>(vertical ? height - 1 - y : y));
  return m;
}

template <typename Tag>
Raster<Tag> hflip(const Raster<Tag>& r) {
  Raster<Tag> out(r.width(), r.height());
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) out(x, y) = r(r.width() - 1 - x, y);
  return out;
}

}  // namespace lungaug
