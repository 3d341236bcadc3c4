#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lungaug/core/error.hpp"

namespace lungaug {

struct ImageTag {};
struct MaskTag {};

// Row-major single-channel 8-bit raster. The tag keeps intensity images and
// label masks from being mixed up at compile time.
template <typename Tag>
class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw validation_error("raster dimensions must be positive, got " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Raster(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) {
      throw validation_error("raster dimensions must be positive, got " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
    if (data_.size() != static_cast<std::size_t>(width) * height) {
      throw validation_error("raster buffer length does not match width*height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t operator()(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t& operator()(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> pixels() const noexcept { return data_; }
  std::span<std::uint8_t> pixels() noexcept { return data_; }
  const std::vector<std::uint8_t>& buffer() const noexcept { return data_; }

  bool same_shape(int w, int h) const noexcept { return width_ == w && height_ == h; }
  template <typename Other>
  bool same_shape(const Raster<Other>& o) const noexcept {
    return width_ == o.width() && height_ == o.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

using Image = Raster<ImageTag>;
using Mask = Raster<MaskTag>;

// Distinct values present in a mask, ascending.
inline std::set<std::uint8_t> label_set(const Mask& mask) {
  bool seen[256] = {};
  for (auto v : mask.pixels()) seen[v] = true;
  std::set<std::uint8_t> out;
  for (int v = 0; v < 256; ++v)
    if (seen[v]) out.insert(static_cast<std::uint8_t>(v));
  return out;
}

inline std::size_t count_nonzero(const Mask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

// Which label vocabulary the mask of a sample is expressed in. Binary masks
// come out of the background/lesion remap and are never remapped again.
enum class LabelSpace { canonical, binary };

struct Sample {
  Image image;
  Mask mask;
  std::string dataset_id;
  std::string sample_id;
  LabelSpace labels = LabelSpace::canonical;

  Sample() = default;
  Sample(Image img, Mask m, std::string dataset, std::string id,
         LabelSpace space = LabelSpace::canonical)
      : image(std::move(img)),
        mask(std::move(m)),
        dataset_id(std::move(dataset)),
        sample_id(std::move(id)),
        labels(space) {
    if (!image.same_shape(mask)) {
      throw validation_error("sample '" + sample_id +
                             "': image and mask dimensions differ");
    }
  }

  int width() const noexcept { return image.width(); }
  int height() const noexcept { return image.height(); }

  friend bool operator==(const Sample&, const Sample&) = default;
};

}  // namespace lungaug
