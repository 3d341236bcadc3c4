#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "lungaug/core/error.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"
#include "lungaug/transforms/clahe.hpp"
#include "lungaug/transforms/filters.hpp"
#include "lungaug/transforms/jpeg.hpp"
#include "lungaug/transforms/spec.hpp"

// Intensity-only transforms. None of them looks at or touches the mask.
// Where a transform is random, the comment lists its draws in stream order.

namespace lungaug {

namespace detail {

template <typename Fn>
Image map_lut(const Image& src, Fn&& fn) {
  std::array<std::uint8_t, 256> lut;
  for (int v = 0; v < 256; ++v) lut[v] = fn(v);
  Image out(src.width(), src.height());
  auto s = src.pixels();
  auto d = out.pixels();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = lut[s[i]];
  return out;
}

inline void fill_rect(Image& img, int x0, int y0, int w, int h, std::uint8_t value) {
  const int x1 = std::min(x0 + w, img.width());
  const int y1 = std::min(y0 + h, img.height());
  for (int y = std::max(y0, 0); y < y1; ++y)
    for (int x = std::max(x0, 0); x < x1; ++x) img(x, y) = value;
}

}  // namespace detail

// Draws per hole: top (uniform_int), left (uniform_int).
inline Image coarse_dropout(const Image& src, int holes, int hole_size, RngStream& rng) {
  if (hole_size < 1) throw validation_error("coarse_dropout: hole_size must be >= 1");
  if (holes > 0 && hole_size >= std::min(src.width(), src.height())) {
    throw validation_error("coarse_dropout: image smaller than hole size");
  }
  Image out = src;
  for (int i = 0; i < holes; ++i) {
    const auto y0 = static_cast<int>(rng.uniform_int(0, src.height() - hole_size));
    const auto x0 = static_cast<int>(rng.uniform_int(0, src.width() - hole_size));
    detail::fill_rect(out, x0, y0, hole_size, hole_size, 0);
  }
  return out;
}

// Square holes of round(ratio * unit) px on a unit-size lattice.
// Draws: x offset, y offset (uniform_int in [0, unit - hole]).
inline Image grid_dropout(const Image& src, double ratio, int unit_size, RngStream& rng) {
  const int hole = static_cast<int>(std::lround(ratio * unit_size));
  const int slack = std::max(unit_size - hole, 0);
  const auto off_x = static_cast<int>(rng.uniform_int(0, slack));
  const auto off_y = static_cast<int>(rng.uniform_int(0, slack));
  Image out = src;
  if (hole <= 0) return out;
  for (int y = off_y; y < src.height(); y += unit_size)
    for (int x = off_x; x < src.width(); x += unit_size) detail::fill_rect(out, x, y, hole, hole, 0);
  return out;
}

// Keeps the `bits` most significant bits.
inline Image posterize(const Image& src, int bits) {
  if (bits < 1 || bits > 8) throw validation_error("posterize: bits must lie in 1..8");
  const auto keep = static_cast<std::uint8_t>(0xFF << (8 - bits));
  return detail::map_lut(src, [keep](int v) { return static_cast<std::uint8_t>(v & keep); });
}

// out = v * (1 + contrast) + brightness * 255
inline Image brightness_contrast(const Image& src, double brightness, double contrast) {
  const double alpha = 1.0 + contrast;
  const double beta = brightness * 255.0;
  return detail::map_lut(src, [&](int v) { return saturate_round(v * alpha + beta); });
}

// out = 255 * (v / 255)^gamma
inline Image gamma_correct(const Image& src, double gamma) {
  if (!(gamma > 0.0)) throw validation_error("gamma must be positive");
  return detail::map_lut(src, [&](int v) {
    return saturate_round(255.0 * std::pow(v / 255.0, gamma));
  });
}

// Grayscale snow: lightness below snow_point * 255 / 2 + 255 / 3 is scaled
// by brightness_coeff, the lightness-channel rule applied to a single channel.
inline Image snow(const Image& src, double snow_point, double brightness_coeff) {
  const double threshold = snow_point * 255.0 / 2.0 + 255.0 / 3.0;
  return detail::map_lut(src, [&](int v) {
    return v < threshold ? saturate_round(v * brightness_coeff) : static_cast<std::uint8_t>(v);
  });
}

inline Kernel3x3 emboss_kernel(double alpha, double strength) {
  const Kernel3x3 effect = {-1 - strength, -strength, 0, -strength, 1, strength, 0, strength,
                            1 + strength};
  Kernel3x3 k{};
  for (int i = 0; i < 9; ++i) k[i] = alpha * effect[i] + (i == 4 ? 1.0 - alpha : 0.0);
  return k;
}

inline Kernel3x3 sharpen_kernel(double alpha, double lightness) {
  const Kernel3x3 effect = {-1, -1, -1, -1, 8 + lightness, -1, -1, -1, -1};
  Kernel3x3 k{};
  for (int i = 0; i < 9; ++i) k[i] = alpha * effect[i] + (i == 4 ? 1.0 - alpha : 0.0);
  return k;
}

inline Image emboss(const Image& src, double alpha, double strength) {
  return filter3x3(src, emboss_kernel(alpha, strength));
}

inline Image sharpen(const Image& src, double alpha, double lightness) {
  return filter3x3(src, sharpen_kernel(alpha, lightness));
}

namespace detail {

template <typename T>
const T& pick(const std::vector<T>& options, RngStream& rng) {
  return options[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];
}

}  // namespace detail

// Draws parameters from `rng` and applies one pixel-level kind.
inline Image apply_pixel_transform(const Image& src, const TransformParams& p, RngStream& rng) {
  return std::visit(
      [&](const auto& q) -> Image {
        using P = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<P, params::Clahe>) {
          return clahe(src, rng.uniform(q.clip_limit.lo, q.clip_limit.hi), q.tile_rows, q.tile_cols);
        } else if constexpr (std::is_same_v<P, params::CoarseDropout>) {
          return coarse_dropout(src, q.holes, q.hole_size, rng);
        } else if constexpr (std::is_same_v<P, params::Emboss>) {
          const double alpha = rng.uniform(q.alpha.lo, q.alpha.hi);
          const double strength = rng.uniform(q.strength.lo, q.strength.hi);
          return emboss(src, alpha, strength);
        } else if constexpr (std::is_same_v<P, params::GaussianBlur>) {
          return gaussian_blur(src, detail::pick(q.kernel_sizes, rng));
        } else if constexpr (std::is_same_v<P, params::GridDropout>) {
          return grid_dropout(src, q.ratio, q.unit_size, rng);
        } else if constexpr (std::is_same_v<P, params::ImageCompression>) {
          return jpeg_roundtrip(src, static_cast<int>(rng.uniform_int(q.quality.lo, q.quality.hi)));
        } else if constexpr (std::is_same_v<P, params::MedianBlur>) {
          return median_blur(src, detail::pick(q.kernel_sizes, rng));
        } else if constexpr (std::is_same_v<P, params::Posterize>) {
          return posterize(src, q.bits);
        } else if constexpr (std::is_same_v<P, params::RandomBrightnessContrast>) {
          const double b = rng.uniform(q.brightness.lo, q.brightness.hi);
          const double c = rng.uniform(q.contrast.lo, q.contrast.hi);
          return brightness_contrast(src, b, c);
        } else if constexpr (std::is_same_v<P, params::RandomGamma>) {
          return gamma_correct(src, rng.uniform(q.gamma.lo, q.gamma.hi));
        } else if constexpr (std::is_same_v<P, params::RandomSnow>) {
          return snow(src, rng.uniform(q.snow_point.lo, q.snow_point.hi), q.brightness_coeff);
        } else if constexpr (std::is_same_v<P, params::Sharpen>) {
          const double alpha = rng.uniform(q.alpha.lo, q.alpha.hi);
          const double lightness = rng.uniform(q.lightness.lo, q.lightness.hi);
          return sharpen(src, alpha, lightness);
        } else {
          throw validation_error(std::string(kind_name(P::kind)) + " is not a pixel-level kind");
        }
      },
      p);
}

}  // namespace lungaug
