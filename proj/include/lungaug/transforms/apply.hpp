#pragma once

#include <optional>

#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"
#include "lungaug/transforms/geometry.hpp"
#include "lungaug/transforms/pixel.hpp"
#include "lungaug/transforms/spatial.hpp"
#include "lungaug/transforms/spec.hpp"

namespace lungaug {

struct TransformOutput {
  Sample sample;
  // Set for spatial kinds: the single map used for both rasters.
  std::optional<GeometricMap> map;
};

inline TransformOutput apply_transform_traced(const Sample& sample, const TransformSpec& spec,
                                              RngStream& rng) {
  spec.validate();
  if (!sample.image.same_shape(sample.mask))
    throw validation_error("sample '" + sample.sample_id + "': image and mask dimensions differ");
  TransformOutput out{sample, std::nullopt};
  if (spec.category() == TransformCategory::pixel) {
    out.sample.image = apply_pixel_transform(sample.image, spec.params(), rng);
    return out;
  }
  auto map = sample_geometric_map(sample.width(), sample.height(), spec.params(), rng);
  if (!map.all_finite()) throw data_error(std::string(kind_name(spec.kind())) + ": non-finite map");
  out.sample.image = remap_bilinear(sample.image, map);
  out.sample.mask = remap_nearest(sample.mask, map);
  out.map = std::move(map);
  return out;
}

// Pure given the stream: equal (sample, spec, stream key) give equal output.
inline Sample apply_transform(const Sample& sample, const TransformSpec& spec, RngStream& rng) {
  return apply_transform_traced(sample, spec, rng).sample;
}

}  // namespace lungaug
