#pragma once

#include <filesystem>
#include <string>

#include "lungaug/core/label_map.hpp"
#include "lungaug/core/png_io.hpp"
#include "lungaug/core/raster.hpp"

namespace lungaug {

// Loads an image/mask pair and translates raw mask values into canonical
// class ids. The sample id is the image file stem.
inline Sample load_sample(const std::filesystem::path& image_path,
                          const std::filesystem::path& mask_path, const LabelMap& label_map) {
  auto image = read_png<ImageTag>(image_path);
  auto raw = read_png<MaskTag>(mask_path);
  if (!image.same_shape(raw)) {
    throw data_error("dimension mismatch between " + image_path.string() + " (" +
                     std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                     ") and " + mask_path.string() + " (" + std::to_string(raw.width()) + "x" +
                     std::to_string(raw.height()) + ")");
  }
  Mask mask;
  try {
    mask = label_map.translate(raw);
  } catch (const Error& e) {
    throw data_error(mask_path.string() + ": " + e.what());
  }
  return Sample(std::move(image), std::move(mask), label_map.dataset_id(),
                image_path.stem().string());
}

// Writes the raster content of a sample verbatim (mask values as stored in
// the sample). Use LabelMap::encode first to write in a dataset's raw form.
inline void save_sample(const Sample& sample, const std::filesystem::path& image_path,
                        const std::filesystem::path& mask_path) {
  write_png(sample.image, image_path);
  write_png(sample.mask, mask_path);
}

}  // namespace lungaug
