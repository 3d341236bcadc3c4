#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lungaug/core/error.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"
#include "lungaug/transforms/filters.hpp"
#include "lungaug/transforms/geometry.hpp"
#include "lungaug/transforms/spec.hpp"

// Geometric map builders for the spatial kinds. Each builder consumes its
// draws in the order listed in its comment; the resulting map is applied to
// the image (bilinear) and the mask (nearest) by apply_transform.

namespace lungaug {

// Smoothing kernel used by the elastic field: radius ceil(3 * sigma).
inline std::vector<double> elastic_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  return gaussian_kernel(2 * radius + 1, sigma);
}

// Draws: width*height uniforms in [-1, 1) for the x field (row-major), then
// the same for y. Both fields are Gaussian-smoothed (reflect-101) and scaled
// by alpha; the map is (x + dx, y + dy).
inline GeometricMap elastic_map(int width, int height, double alpha, double sigma, RngStream& rng) {
  if (!std::isfinite(alpha) || !std::isfinite(sigma))
    throw validation_error("elastic: non-finite parameters");
  if (alpha < 0.0) throw validation_error("elastic: alpha must be >= 0");
  if (!(sigma > 0.0)) throw validation_error("elastic: sigma must be > 0");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> fx(n), fy(n);
  for (auto& v : fx) v = rng.uniform(-1.0, 1.0);
  for (auto& v : fy) v = rng.uniform(-1.0, 1.0);
  const auto kernel = elastic_kernel(sigma);
  fx = gaussian_smooth(fx, width, height, kernel);
  fy = gaussian_smooth(fy, width, height, kernel);
  GeometricMap map(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      map.set(x, y, static_cast<float>(x + alpha * fx[i]), static_cast<float>(y + alpha * fy[i]));
    }
  }
  return map;
}

// Warps any raster-like image with a fresh elastic field and returns the
// field alongside, so the same displacement can be applied to a mask.
inline std::pair<Image, GeometricMap> elastic_warp(const Image& src, double alpha, double sigma,
                                                   RngStream& rng) {
  auto map = elastic_map(src.width(), src.height(), alpha, sigma, rng);
  auto warped = remap_bilinear(src, map);
  return {std::move(warped), std::move(map)};
}

// Draws: shift_x, shift_y (fractions of width/height), scale, angle.
inline GeometricMap shift_scale_rotate_map(int width, int height, const params::ShiftScaleRotate& p,
                                           RngStream& rng) {
  const double sx = rng.uniform(p.shift.lo, p.shift.hi);
  const double sy = rng.uniform(p.shift.lo, p.shift.hi);
  const double scale = rng.uniform(p.scale.lo, p.scale.hi);
  const double angle = rng.uniform(p.angle.lo, p.angle.hi);
  return map_from_affine(width, height,
                         shift_scale_rotate_inverse(width, height, sx * width, sy * height, scale, angle));
}

// Draws: one uniform_int choosing the axis entry.
inline GeometricMap flip_map(int width, int height, const params::Flip& p, RngStream& rng) {
  const auto& axis =
      p.axes[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(p.axes.size()) - 1))];
  const bool h = axis == "horizontal" || axis == "both";
  const bool v = axis == "vertical" || axis == "both";
  return flip_map(width, height, h, v);
}

// Draws: angle.
inline GeometricMap rotate_map(int width, int height, const params::Rotate& p, RngStream& rng) {
  const double angle = rng.uniform(p.angle.lo, p.angle.hi);
  return map_from_affine(width, height, shift_scale_rotate_inverse(width, height, 0, 0, 1.0, angle));
}

namespace detail {

// Piecewise-linear resampling of one axis: num_steps equal segments of
// length side / num_steps (integer division) are stretched by their step
// factor, the trailing remainder segment is pinned to end at `side`.
inline std::vector<double> grid_axis(int side, int num_steps, const std::vector<double>& steps) {
  const int step = side / num_steps;
  std::vector<double> coords(side);
  double prev = 0.0;
  for (int idx = 0; idx <= num_steps; ++idx) {
    const int start = idx * step;
    int end = start + step;
    double cur;
    if (end >= side || idx == num_steps) {
      end = side;
      cur = side;
    } else {
      cur = prev + step * steps[idx];
    }
    const int len = end - start;
    for (int k = 0; k < len; ++k) coords[start + k] = prev + (cur - prev) * k / len;
    prev = cur;
    if (end == side) break;
  }
  return coords;
}

}  // namespace detail

// Draws: num_steps+1 x step factors (1 + U(distort)), then num_steps+1 for y.
inline GeometricMap grid_distortion_map(int width, int height, const params::GridDistortion& p,
                                        RngStream& rng) {
  if (width < p.num_steps || height < p.num_steps)
    throw validation_error("GridDistortion: image smaller than the step count");
  std::vector<double> xs(p.num_steps + 1), ys(p.num_steps + 1);
  for (auto& v : xs) v = 1.0 + rng.uniform(p.distort.lo, p.distort.hi);
  for (auto& v : ys) v = 1.0 + rng.uniform(p.distort.lo, p.distort.hi);
  const auto cx = detail::grid_axis(width, p.num_steps, xs);
  const auto cy = detail::grid_axis(height, p.num_steps, ys);
  GeometricMap map(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) map.set(x, y, static_cast<float>(cx[x]), static_cast<float>(cy[y]));
  return map;
}

// Radial lens model around a shifted principal point:
//   r = (p - c) / (W, H),  src = p + (p - c) * (k r^2 + k r^4)
// Draws: k, shift_x, shift_y (fractions of width/height).
inline GeometricMap optical_distortion_map(int width, int height, const params::OpticalDistortion& p,
                                           RngStream& rng) {
  const double k = rng.uniform(p.distort.lo, p.distort.hi);
  const double dx = rng.uniform(p.shift.lo, p.shift.hi) * width;
  const double dy = rng.uniform(p.shift.lo, p.shift.hi) * height;
  const double cx = width * 0.5 + dx;
  const double cy = height * 0.5 + dy;
  GeometricMap map(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double nx = (x - cx) / width, ny = (y - cy) / height;
      const double r2 = nx * nx + ny * ny;
      const double gain = k * r2 + k * r2 * r2;
      map.set(x, y, static_cast<float>(x + (x - cx) * gain), static_cast<float>(y + (y - cy) * gain));
    }
  }
  return map;
}

// A rows x cols lattice spanning the image; each node's source position is
// jittered by N(0, scale * side) per axis. Every lattice cell is split along
// its main diagonal into two triangles, each mapped affinely.
// Draws: for each node row-major, x jitter then y jitter (two uniforms each).
inline GeometricMap piecewise_affine_map(int width, int height, const params::PiecewiseAffine& p,
                                         RngStream& rng) {
  const int rows = p.rows, cols = p.cols;
  std::vector<double> jx(static_cast<std::size_t>(rows) * cols), jy(jx.size());
  for (std::size_t i = 0; i < jx.size(); ++i) {
    jx[i] = rng.normal() * p.scale * width;
    jy[i] = rng.normal() * p.scale * height;
  }
  const double cell_w = cols > 1 ? (width - 1.0) / (cols - 1) : 1.0;
  const double cell_h = rows > 1 ? (height - 1.0) / (rows - 1) : 1.0;
  auto node = [&](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };
  GeometricMap map(width, height);
  for (int y = 0; y < height; ++y) {
    const int r = std::clamp(cell_h > 0 ? static_cast<int>(y / cell_h) : 0, 0, rows - 2);
    const double v = cell_h > 0 ? y / cell_h - r : 0.0;
    for (int x = 0; x < width; ++x) {
      const int c = std::clamp(cell_w > 0 ? static_cast<int>(x / cell_w) : 0, 0, cols - 2);
      const double u = cell_w > 0 ? x / cell_w - c : 0.0;
      double dx, dy;
      if (u + v <= 1.0) {
        const auto a = node(r, c), b = node(r, c + 1), d = node(r + 1, c);
        dx = jx[a] + u * (jx[b] - jx[a]) + v * (jx[d] - jx[a]);
        dy = jy[a] + u * (jy[b] - jy[a]) + v * (jy[d] - jy[a]);
      } else {
        const auto a = node(r + 1, c + 1), b = node(r + 1, c), d = node(r, c + 1);
        dx = jx[a] + (1.0 - u) * (jx[b] - jx[a]) + (1.0 - v) * (jx[d] - jx[a]);
        dy = jy[a] + (1.0 - u) * (jy[b] - jy[a]) + (1.0 - v) * (jy[d] - jy[a]);
      }
      map.set(x, y, static_cast<float>(x + dx), static_cast<float>(y + dy));
    }
  }
  return map;
}

// Crop window resampled back to the full frame (pixel-center aligned).
// Draws: top, left (uniform_int).
inline GeometricMap random_crop_map(int width, int height, const params::RandomCrop& p, RngStream& rng) {
  if (p.width > width || p.height > height) {
    throw validation_error("RandomCrop: image " + std::to_string(width) + "x" + std::to_string(height) +
                           " smaller than crop window " + std::to_string(p.width) + "x" +
                           std::to_string(p.height));
  }
  const auto top = static_cast<int>(rng.uniform_int(0, height - p.height));
  const auto left = static_cast<int>(rng.uniform_int(0, width - p.width));
  const double kx = static_cast<double>(p.width) / width;
  const double ky = static_cast<double>(p.height) / height;
  GeometricMap map(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      map.set(x, y, static_cast<float>(left + (x + 0.5) * kx - 0.5),
              static_cast<float>(top + (y + 0.5) * ky - 0.5));
  return map;
}

inline GeometricMap sample_geometric_map(int width, int height, const TransformParams& p, RngStream& rng) {
  return std::visit(
      [&](const auto& q) -> GeometricMap {
        using P = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<P, params::Elastic>) {
          return elastic_map(width, height, q.alpha, q.sigma, rng);
        } else if constexpr (std::is_same_v<P, params::Flip>) {
          return flip_map(width, height, q, rng);
        } else if constexpr (std::is_same_v<P, params::GridDistortion>) {
          return grid_distortion_map(width, height, q, rng);
        } else if constexpr (std::is_same_v<P, params::OpticalDistortion>) {
          return optical_distortion_map(width, height, q, rng);
        } else if constexpr (std::is_same_v<P, params::PiecewiseAffine>) {
          return piecewise_affine_map(width, height, q, rng);
        } else if constexpr (std::is_same_v<P, params::RandomCrop>) {
          return random_crop_map(width, height, q, rng);
        } else if constexpr (std::is_same_v<P, params::Rotate>) {
          return rotate_map(width, height, q, rng);
        } else if constexpr (std::is_same_v<P, params::ShiftScaleRotate>) {
          return shift_scale_rotate_map(width, height, q, rng);
        } else {
          throw validation_error(std::string(kind_name(P::kind)) + " is not a spatial kind");
        }
      },
      p);
}

}  // namespace lungaug
