#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "lungaug/scheduler.hpp"

// Arrays-in/arrays-out surface for host-language training loops. A host
// binding wraps exactly bind_plan and augment_batch_arrays; everything else
// stays native.

namespace lungaug {

class BoundPlan {
 public:
  // Only reachable through validation: the config must hold exactly one
  // plan record.
  static BoundPlan bind(const std::filesystem::path& config_path, std::uint64_t master_seed) {
    auto plans = load_plans(config_path);
    if (plans.size() != 1)
      throw validation_error("bind_plan: config must contain exactly one plan record");
    return BoundPlan(std::move(plans.front()), master_seed);
  }

  static BoundPlan bind(const nlohmann::json& record, std::uint64_t master_seed) {
    return BoundPlan(AugmentationPlan::from_json(record), master_seed);
  }

  const AugmentationPlan& plan() const noexcept { return plan_; }
  std::uint64_t master_seed() const noexcept { return seed_; }

 private:
  BoundPlan(AugmentationPlan plan, std::uint64_t seed) : plan_(std::move(plan)), seed_(seed) {}

  AugmentationPlan plan_;
  std::uint64_t seed_;
};

inline BoundPlan bind_plan(const std::filesystem::path& config_path, std::uint64_t master_seed) {
  return BoundPlan::bind(config_path, master_seed);
}

struct ArrayShape {
  std::size_t count = 0;
  int height = 0;
  int width = 0;

  std::size_t plane() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::size_t elements() const noexcept { return count * plane(); }
};

// Augments n x H x W uint8 image and mask buffers in place, with the same
// keys as augment_batch. Returns the number of samples that were changed
// by the gate (0 or count in batch mode).
inline std::size_t augment_batch_arrays(const BoundPlan& bound, std::span<std::uint8_t> images,
                                        std::span<std::uint8_t> masks, ArrayShape shape,
                                        std::uint64_t epoch, std::uint64_t batch_index, int jobs = 1) {
  if (shape.count == 0 || shape.height <= 0 || shape.width <= 0)
    throw validation_error("augment_batch_arrays: empty or degenerate shape");
  if (images.size() != shape.elements() || masks.size() != shape.elements())
    throw validation_error("augment_batch_arrays: buffer sizes do not match n*H*W");

  Batch batch{{}, epoch, batch_index};
  batch.samples.reserve(shape.count);
  const auto plane = shape.plane();
  for (std::size_t i = 0; i < shape.count; ++i) {
    auto img = images.subspan(i * plane, plane);
    auto msk = masks.subspan(i * plane, plane);
    batch.samples.emplace_back(Image(shape.width, shape.height, {img.begin(), img.end()}),
                               Mask(shape.width, shape.height, {msk.begin(), msk.end()}), "array",
                               std::to_string(i));
  }
  const auto out = augment_batch(batch, bound.plan(), bound.master_seed(), jobs);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < shape.count; ++i) {
    const auto& s = out.samples[i];
    if (s == batch.samples[i]) continue;
    ++changed;
    std::copy(s.image.pixels().begin(), s.image.pixels().end(), images.begin() + i * plane);
    std::copy(s.mask.pixels().begin(), s.mask.pixels().end(), masks.begin() + i * plane);
  }
  return changed;
}

}  // namespace lungaug
