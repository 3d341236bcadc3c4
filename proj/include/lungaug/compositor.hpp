#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lungaug/core/error.hpp"
#include "lungaug/core/parallel.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"
#include "lungaug/transforms/filters.hpp"
#include "lungaug/transforms/geometry.hpp"

// Lesion transplant into generated healthy-lung slices. Any nonzero value of
// a lung or lesion mask counts as foreground.

namespace lungaug {

enum class HealthySource { starganv2, stylegan2ada, other };

inline std::string to_string(HealthySource s) {
  switch (s) {
    case HealthySource::starganv2: return "starganv2";
    case HealthySource::stylegan2ada: return "stylegan2ada";
    default: return "other";
  }
}

inline HealthySource parse_healthy_source(const std::string& s) {
  if (s == "starganv2") return HealthySource::starganv2;
  if (s == "stylegan2ada") return HealthySource::stylegan2ada;
  if (s == "other") return HealthySource::other;
  throw validation_error("unknown healthy source '" + s + "'");
}

inline std::size_t lung_area(const Mask& mask) { return count_nonzero(mask); }

struct BoundingBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive
  bool empty() const noexcept { return x1 < x0; }
};

inline BoundingBox bounding_box(const Mask& m) {
  BoundingBox b{m.width(), m.height(), -1, -1};
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) {
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
      }
  if (b.x1 < 0) return BoundingBox{};
  return b;
}

struct HealthySample {
  std::string id;
  Image image;
  Mask lung_mask;
  HealthySource source = HealthySource::other;

  HealthySample(std::string id_, Image img, Mask lung, HealthySource src = HealthySource::other)
      : id(std::move(id_)), image(std::move(img)), lung_mask(std::move(lung)), source(src) {
    if (!image.same_shape(lung_mask)) throw validation_error("healthy '" + id + "': image/lung mask dimensions differ");
    area_ = lung_area(lung_mask);
    if (area_ == 0) throw validation_error("healthy '" + id + "': lung mask is empty");
    bbox_ = bounding_box(lung_mask);
  }

  std::size_t area() const noexcept { return area_; }
  const BoundingBox& bbox() const noexcept { return bbox_; }

 private:
  std::size_t area_ = 0;
  BoundingBox bbox_;
};

struct LesionSample {
  std::string id;
  Image image;
  Mask lesion_mask;
  Mask lung_mask;

  LesionSample(std::string id_, Image img, Mask lesion, Mask lung)
      : id(std::move(id_)), image(std::move(img)), lesion_mask(std::move(lesion)), lung_mask(std::move(lung)) {
    if (!image.same_shape(lesion_mask) || !image.same_shape(lung_mask))
      throw validation_error("lesion sample '" + id + "': image/mask dimensions differ");
    area_ = lung_area(lung_mask);
    bbox_ = bounding_box(lung_mask);
  }

  std::size_t area() const noexcept { return area_; }
  const BoundingBox& bbox() const noexcept { return bbox_; }

  LesionSample flipped() const {
    return LesionSample(id, hflip(image), hflip(lesion_mask), hflip(lung_mask));
  }

 private:
  std::size_t area_ = 0;
  BoundingBox bbox_;
};

// Inclusive on both ends: |a_lesion / a_healthy - 1| <= tolerance.
inline bool size_matched(std::size_t lesion_area, std::size_t healthy_area, double tolerance) {
  const double diff = std::abs(static_cast<double>(lesion_area) - static_cast<double>(healthy_area));
  return diff <= tolerance * static_cast<double>(healthy_area);
}

inline std::vector<std::size_t> match_candidate_indices(const HealthySample& healthy,
                                                        const std::vector<LesionSample>& pool, double tolerance) {
  if (!(tolerance >= 0.0) || !std::isfinite(tolerance)) throw validation_error("size tolerance must be >= 0");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (size_matched(pool[i].area(), healthy.area(), tolerance)) out.push_back(i);
  return out;
}

inline std::vector<LesionSample> match_candidates(const HealthySample& healthy, const std::vector<LesionSample>& pool,
                                                  double tolerance) {
  std::vector<LesionSample> out;
  for (auto i : match_candidate_indices(healthy, pool, tolerance)) out.push_back(pool[i]);
  return out;
}

struct CompositeRecipe {
  const HealthySample* healthy = nullptr;
  const LesionSample* lesion = nullptr;
  bool flip_lesion = false;
  double blend_weight = 0.5;
  int smooth_kernel = 5;
  double size_tolerance = 0.10;

  void validate() const {
    if (!healthy || !lesion) throw validation_error("composite recipe: missing healthy or lesion sample");
    if (!(blend_weight > 0.0 && blend_weight < 1.0)) throw validation_error("blend_weight must lie in (0, 1)");
    if (smooth_kernel < 1 || smooth_kernel % 2 == 0) throw validation_error("smooth_kernel must be odd and >= 1");
    if (!(size_tolerance >= 0.0)) throw validation_error("size_tolerance must be >= 0");
    if (!size_matched(lesion->area(), healthy->area(), size_tolerance)) {
      throw validation_error("composite recipe: lung areas " + std::to_string(lesion->area()) + " (lesion '" +
                             lesion->id + "') and " + std::to_string(healthy->area()) + " (healthy '" + healthy->id +
                             "') differ by more than the size tolerance");
    }
  }
};

struct Offset {
  int dx = 0, dy = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

struct CompositeSample {
  Sample sample;
  std::string healthy_id;
  std::string lesion_id;
  bool flip = false;
  Offset offset;
  double blend_weight = 0.5;

  nlohmann::ordered_json provenance() const {
    nlohmann::ordered_json j;
    j["healthy_id"] = healthy_id;
    j["lesion_id"] = lesion_id;
    j["flip"] = flip;
    j["offset"] = {offset.dx, offset.dy};
    j["blend_weight"] = blend_weight;
    return j;
  }
};

namespace detail {

// Half-pixel ties go toward +inf so the rule is translation invariant.
inline int half_round(int twice) { return static_cast<int>(std::floor(twice / 2.0 + 0.5)); }

// Lesion lung box after an optional horizontal flip, without flipping pixels.
inline BoundingBox lesion_box(const LesionSample& l, bool flip) {
  BoundingBox b = l.bbox();
  if (flip && !b.empty()) {
    const int w = l.image.width();
    b = {w - 1 - b.x1, b.y0, w - 1 - b.x0, b.y1};
  }
  return b;
}

inline Offset alignment_offset(const BoundingBox& healthy, const BoundingBox& lesion) {
  return {half_round((healthy.x0 + healthy.x1) - (lesion.x0 + lesion.x1)),
          half_round((healthy.y0 + healthy.y1) - (lesion.y0 + lesion.y1))};
}

// Source coordinate in the lesion frame of destination pixel (x, y), or
// false when it falls outside the lesion raster.
inline bool lesion_source(const LesionSample& l, bool flip, Offset off, int x, int y, int* sx, int* sy) {
  int lx = x - off.dx;
  const int ly = y - off.dy;
  if (lx < 0 || ly < 0 || lx >= l.image.width() || ly >= l.image.height()) return false;
  if (flip) lx = l.image.width() - 1 - lx;
  *sx = lx;
  *sy = ly;
  return true;
}

}  // namespace detail

// True when at least one lesion pixel lands inside the healthy lungs.
inline bool composite_survives(const HealthySample& h, const LesionSample& l, bool flip) {
  const Offset off = detail::alignment_offset(h.bbox(), detail::lesion_box(l, flip));
  int sx = 0, sy = 0;
  for (int y = 0; y < h.image.height(); ++y)
    for (int x = 0; x < h.image.width(); ++x)
      if (h.lung_mask(x, y) && detail::lesion_source(l, flip, off, x, y, &sx, &sy) && l.lung_mask(sx, sy) &&
          l.lesion_mask(sx, sy))
        return true;
  return false;
}

// Steps: optional flip of the lesion sample, alignment of lung bounding-box
// centers, transplant of the lesion lungs clipped to the healthy lungs,
// weighted blend inside that region, Gaussian smoothing in a 2 px band
// around its border, lesion mask carried along and clipped the same way.
inline CompositeSample compose(const CompositeRecipe& recipe, const std::string& sample_id = "",
                               const std::string& dataset_id = "composite") {
  recipe.validate();
  const HealthySample& h = *recipe.healthy;
  const LesionSample& l = *recipe.lesion;
  const bool flip = recipe.flip_lesion;
  const int w = h.image.width();
  const int ht = h.image.height();
  const Offset off = detail::alignment_offset(h.bbox(), detail::lesion_box(l, flip));

  Mask region(w, ht, 0);
  Mask out_mask(w, ht, 0);
  Image blended = h.image;
  const double a = recipe.blend_weight;
  std::size_t lesion_pixels = 0;
  int sx = 0, sy = 0;
  for (int y = 0; y < ht; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!h.lung_mask(x, y) || !detail::lesion_source(l, flip, off, x, y, &sx, &sy) || !l.lung_mask(sx, sy))
        continue;
      region(x, y) = 1;
      blended(x, y) = saturate_round(a * l.image(sx, sy) + (1.0 - a) * h.image(x, y));
      if (l.lesion_mask(sx, sy)) {
        out_mask(x, y) = 1;
        ++lesion_pixels;
      }
    }
  }
  if (lesion_pixels == 0) {
    throw data_error("degenerate composite: no lesion pixel of '" + l.id + "' survives clipping to the lungs of '" +
                     h.id + "'");
  }

  Image out = blended;
  if (recipe.smooth_kernel > 1) {
    // Band: pixels with a pixel of the other side within Chebyshev distance 2.
    constexpr int band = 2;
    const int k = recipe.smooth_kernel;
    const int r = k / 2;
    const auto kern = gaussian_kernel(k, sigma_for_kernel(k));
    for (int y = 0; y < ht; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto inside = region(x, y);
        bool near_edge = false;
        for (int dy = -band; dy <= band && !near_edge; ++dy)
          for (int dx = -band; dx <= band; ++dx) {
            const int qx = x + dx, qy = y + dy;
            if (region.contains(qx, qy) && region(qx, qy) != inside) {
              near_edge = true;
              break;
            }
          }
        if (!near_edge) continue;
        double acc = 0.0;
        for (int j = -r; j <= r; ++j) {
          const int yy = reflect101(y + j, ht);
          double row = 0.0;
          for (int i = -r; i <= r; ++i) row += kern[i + r] * blended(reflect101(x + i, w), yy);
          acc += kern[j + r] * row;
        }
        out(x, y) = saturate_round(acc);
      }
    }
  }

  CompositeSample cs;
  cs.sample = Sample(std::move(out), std::move(out_mask), dataset_id,
                     sample_id.empty() ? h.id + "+" + l.id + (flip ? "+f" : "") : sample_id, LabelSpace::binary);
  cs.healthy_id = h.id;
  cs.lesion_id = l.id;
  cs.flip = flip;
  cs.offset = off;
  cs.blend_weight = a;
  return cs;
}

// ---------------------------------------------------------------------------
// Offline expansion

struct ExpandOptions {
  bool flip_lesion = false;
  double blend_weight = 0.5;
  int smooth_kernel = 5;
  double size_tolerance = 0.10;
  int retry_budget = 32;
  std::string dataset_id = "composite";
  int jobs = 1;
};

struct ExpandResult {
  std::vector<Sample> samples;  // originals first, then composites
  std::vector<CompositeSample> composites;
};

inline std::size_t expansion_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

struct RecipeDraw {
  std::size_t healthy = 0;
  std::size_t lesion = 0;
};

// Recipes are drawn sequentially from `rng`: a healthy image, then a
// size-matched lesion sample whose lesion survives clipping. A healthy image
// without such a partner is redrawn, at most retry_budget times per composite.
// Works on areas plus a survival predicate so callers can keep pools on disk.
template <typename Survives>
std::vector<RecipeDraw> draw_recipe_indices(std::size_t count, const std::vector<std::size_t>& healthy_areas,
                                            const std::vector<std::size_t>& lesion_areas, Survives&& survives,
                                            RngStream& rng, const ExpandOptions& opt = {}) {
  if (healthy_areas.empty() || lesion_areas.empty()) throw validation_error("expand_offline: pools must be nonempty");
  if (opt.retry_budget < 0) throw validation_error("expand_offline: retry budget must be >= 0");
  if (!(opt.size_tolerance >= 0.0)) throw validation_error("size tolerance must be >= 0");
  std::vector<RecipeDraw> draws;
  draws.reserve(count);
  std::vector<std::size_t> cands;
  for (std::size_t c = 0; c < count; ++c) {
    bool found = false;
    for (int attempt = 0; attempt <= opt.retry_budget && !found; ++attempt) {
      const auto hi = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(healthy_areas.size()) - 1));
      cands.clear();
      for (std::size_t i = 0; i < lesion_areas.size(); ++i)
        if (size_matched(lesion_areas[i], healthy_areas[hi], opt.size_tolerance)) cands.push_back(i);
      if (cands.empty()) continue;
      const auto li = cands[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cands.size()) - 1))];
      if (!survives(hi, li)) continue;
      draws.push_back({hi, li});
      found = true;
    }
    if (!found) {
      throw data_error("expand_offline: retry budget of " + std::to_string(opt.retry_budget) +
                       " exhausted without a matchable healthy/lesion pair");
    }
  }
  return draws;
}

inline std::vector<CompositeRecipe> draw_recipes(std::size_t count, const std::vector<HealthySample>& healthy_pool,
                                                 const std::vector<LesionSample>& lesion_pool, RngStream& rng,
                                                 const ExpandOptions& opt = {}) {
  std::vector<std::size_t> ha, la;
  for (const auto& h : healthy_pool) ha.push_back(h.area());
  for (const auto& l : lesion_pool) la.push_back(l.area());
  const auto draws = draw_recipe_indices(
      count, ha, la,
      [&](std::size_t h, std::size_t l) { return composite_survives(healthy_pool[h], lesion_pool[l], opt.flip_lesion); },
      rng, opt);
  std::vector<CompositeRecipe> recipes;
  for (const auto& d : draws)
    recipes.push_back({&healthy_pool[d.healthy], &lesion_pool[d.lesion], opt.flip_lesion, opt.blend_weight,
                       opt.smooth_kernel, opt.size_tolerance});
  return recipes;
}

inline std::string composite_id(std::size_t i) {
  char id[32];
  std::snprintf(id, sizeof id, "composite_%05zu", i);
  return id;
}

inline std::vector<CompositeSample> compose_all(const std::vector<CompositeRecipe>& recipes,
                                                const ExpandOptions& opt = {}) {
  std::vector<CompositeSample> out(recipes.size());
  parallel_for(recipes.size(), opt.jobs,
               [&](std::size_t i) { out[i] = compose(recipes[i], composite_id(i), opt.dataset_id); });
  return out;
}

inline ExpandResult expand_offline(const std::vector<Sample>& train, const std::vector<HealthySample>& healthy_pool,
                                   const std::vector<LesionSample>& lesion_pool, double fraction, RngStream& rng,
                                   const ExpandOptions& opt = {}) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw validation_error("expand_offline: fraction must lie in (0, 1]");
  if (healthy_pool.empty() || lesion_pool.empty()) throw validation_error("expand_offline: pools must be nonempty");
  ExpandResult res;
  res.samples = train;
  const std::size_t count = expansion_count(train.size(), fraction);
  if (count == 0) return res;
  res.composites = compose_all(draw_recipes(count, healthy_pool, lesion_pool, rng, opt), opt);
  for (const auto& cs : res.composites) res.samples.push_back(cs.sample);
  return res;
}

}  // namespace lungaug
