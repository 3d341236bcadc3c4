#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lungaug/core/raster.hpp"
#include "lungaug/transforms/geometry.hpp"

namespace lungaug {

// Border index helpers.
inline int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

inline int replicate(int i, int n) noexcept { return std::clamp(i, 0, n - 1); }

using Kernel3x3 = std::array<double, 9>;

// Correlation with a 3x3 kernel, reflect-101 borders, rounded and saturated.
inline Image filter3x3(const Image& src, const Kernel3x3& k) {
  Image out(src.width(), src.height());
  const int w = src.width(), h = src.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          acc += k[(dy + 1) * 3 + (dx + 1)] * src(reflect101(x + dx, w), reflect101(y + dy, h));
      out(x, y) = saturate_round(acc);
    }
  }
  return out;
}

// Sigma implied by an odd kernel size when none is given.
inline double sigma_for_kernel(int ksize) { return 0.3 * ((ksize - 1) * 0.5 - 1.0) + 0.8; }

inline std::vector<double> gaussian_kernel(int ksize, double sigma) {
  std::vector<double> k(ksize);
  const int r = ksize / 2;
  double sum = 0.0;
  for (int i = 0; i < ksize; ++i) {
    const double d = i - r;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable smoothing of a real-valued field, reflect-101 borders.
inline std::vector<double> gaussian_smooth(const std::vector<double>& field, int width, int height,
                                           const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size()) / 2;
  std::vector<double> tmp(field.size()), out(field.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i)
        acc += kernel[i + r] * field[static_cast<std::size_t>(y) * width + reflect101(x + i, width)];
      tmp[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i)
        acc += kernel[i + r] * tmp[static_cast<std::size_t>(reflect101(y + i, height)) * width + x];
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

inline Image gaussian_blur(const Image& src, int ksize, double sigma = 0.0) {
  if (ksize < 1 || ksize % 2 == 0) throw validation_error("gaussian_blur: kernel must be odd");
  if (sigma <= 0.0) sigma = sigma_for_kernel(ksize);
  std::vector<double> field(src.pixels().begin(), src.pixels().end());
  const auto smoothed = gaussian_smooth(field, src.width(), src.height(), gaussian_kernel(ksize, sigma));
  Image out(src.width(), src.height());
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = saturate_round(smoothed[i]);
  return out;
}

// Median over a ksize x ksize window, replicated borders.
inline Image median_blur(const Image& src, int ksize) {
  if (ksize < 1 || ksize % 2 == 0) throw validation_error("median_blur: kernel must be odd");
  const int w = src.width(), h = src.height(), r = ksize / 2;
  Image out(w, h);
  std::vector<std::uint8_t> window(static_cast<std::size_t>(ksize) * ksize);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::size_t n = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
          window[n++] = src(replicate(x + dx, w), replicate(y + dy, h));
      std::nth_element(window.begin(), window.begin() + n / 2, window.end());
      out(x, y) = window[n / 2];
    }
  }
  return out;
}

}  // namespace lungaug
