#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lungaug/core/error.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/transforms/filters.hpp"

namespace lungaug {

// Contrast limited adaptive histogram equalization.
//
// The image is padded (reflect-101) up to a multiple of the tile grid. Each
// tile gets a 256-bin histogram clipped at max(clip_limit * area / 256, 1);
// the clipped excess is spread evenly over all bins, the remainder one count
// per bin at a regular stride from bin 0. Tile lookup tables are
// round(cdf * 255 / area) and pixels blend the four nearest tile tables
// bilinearly (tile centers as nodes, clamped at the outer tiles).
inline Image clahe(const Image& src, double clip_limit, int tile_rows, int tile_cols) {
  if (tile_rows <= 0 || tile_cols <= 0) throw validation_error("clahe: degenerate tile grid");
  if (!(clip_limit >= 1.0) || !std::isfinite(clip_limit))
    throw validation_error("clahe: clip_limit must be >= 1");

  const int w = src.width(), h = src.height();
  const int padded_w = w + (tile_cols - w % tile_cols) % tile_cols;
  const int padded_h = h + (tile_rows - h % tile_rows) % tile_rows;
  const int tile_w = padded_w / tile_cols;
  const int tile_h = padded_h / tile_rows;
  const int area = tile_w * tile_h;
  const int limit = std::max(static_cast<int>(clip_limit * area / 256.0), 1);
  const double lut_scale = 255.0 / area;

  std::vector<std::array<std::uint8_t, 256>> luts(static_cast<std::size_t>(tile_rows) * tile_cols);
  for (int ty = 0; ty < tile_rows; ++ty) {
    for (int tx = 0; tx < tile_cols; ++tx) {
      std::array<int, 256> hist{};
      for (int y = ty * tile_h; y < (ty + 1) * tile_h; ++y)
        for (int x = tx * tile_w; x < (tx + 1) * tile_w; ++x)
          ++hist[src(reflect101(x, w), reflect101(y, h))];

      int clipped = 0;
      for (auto& c : hist) {
        if (c > limit) {
          clipped += c - limit;
          c = limit;
        }
      }
      const int batch = clipped / 256;
      int residual = clipped - batch * 256;
      for (auto& c : hist) c += batch;
      if (residual > 0) {
        const int step = std::max(256 / residual, 1);
        for (int i = 0; i < 256 && residual > 0; i += step, --residual) ++hist[i];
      }

      auto& lut = luts[static_cast<std::size_t>(ty) * tile_cols + tx];
      int sum = 0;
      for (int i = 0; i < 256; ++i) {
        sum += hist[i];
        lut[i] = saturate_round(sum * lut_scale);
      }
    }
  }

  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    const double tyf = static_cast<double>(y) / tile_h - 0.5;
    int ty1 = static_cast<int>(std::floor(tyf));
    int ty2 = ty1 + 1;
    const double ya = tyf - ty1;
    ty1 = std::max(ty1, 0);
    ty2 = std::min(ty2, tile_rows - 1);
    for (int x = 0; x < w; ++x) {
      const double txf = static_cast<double>(x) / tile_w - 0.5;
      int tx1 = static_cast<int>(std::floor(txf));
      int tx2 = tx1 + 1;
      const double xa = txf - tx1;
      tx1 = std::max(tx1, 0);
      tx2 = std::min(tx2, tile_cols - 1);
      const auto v = src(x, y);
      auto lut = [&](int ty, int tx) -> double {
        return luts[static_cast<std::size_t>(ty) * tile_cols + tx][v];
      };
      const double res = (lut(ty1, tx1) * (1.0 - xa) + lut(ty1, tx2) * xa) * (1.0 - ya) +
                         (lut(ty2, tx1) * (1.0 - xa) + lut(ty2, tx2) * xa) * ya;
      out(x, y) = saturate_round(res);
    }
  }
  return out;
}

}  // namespace lungaug
