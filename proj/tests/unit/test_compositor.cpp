#include <gtest/gtest.h>

#include "lungaug/compositor.hpp"
#include "support/fixtures.hpp"

using namespace lungaug;
using lungaug::testing::Gen;

namespace {

HealthySample random_healthy(Gen& g, int size, const std::string& id) {
  const double rx = size * g.real(0.15, 0.2), ry = size * g.real(0.25, 0.33);
  return HealthySample(id, lungaug::testing::textured_image(g, size, size),
                       lungaug::testing::lung_mask(size, size, size / 2.0 + g.real(-3, 3), size / 2.0 + g.real(-3, 3), rx, ry));
}

// Lesions may spill outside the lungs, as real annotations do.
LesionSample random_lesion(Gen& g, int size, const std::string& id) {
  const double rx = size * g.real(0.15, 0.2), ry = size * g.real(0.25, 0.33);
  const double cx = size / 2.0 + g.real(-3, 3), cy = size / 2.0 + g.real(-3, 3);
  auto lung = lungaug::testing::lung_mask(size, size, cx, cy, rx, ry);
  Mask lesion(size, size, 0);
  for (int b = 0; b < g.integer(1, 3); ++b)
    lungaug::testing::fill_ellipse(lesion, cx + (g.coin() ? -1 : 1) * rx * 1.1 + g.real(-rx, rx), cy + g.real(-ry, ry),
                                   g.real(1, 5), g.real(1, 5), 1);
  return LesionSample(id, lungaug::testing::textured_image(g, size, size), std::move(lesion), std::move(lung));
}

HealthySample square_healthy(std::size_t area) {
  Mask m(64, 64, 0);
  for (std::size_t i = 0; i < area; ++i) m.pixels()[i] = 1;
  return HealthySample("h", Image(64, 64), m);
}

LesionSample square_lesion(std::size_t area, const std::string& id) {
  Mask lung(64, 64, 0);
  for (std::size_t i = 0; i < area; ++i) lung.pixels()[i] = 1;
  return LesionSample(id, Image(64, 64), lung, lung);
}

}  // namespace

TEST(Compositor, SizeMatchExample) {
  const auto h = square_healthy(1000);
  const std::vector<LesionSample> pool = {square_lesion(900, "a"), square_lesion(1100, "b"), square_lesion(1101, "c"),
                                          square_lesion(899, "d")};
  EXPECT_EQ(match_candidate_indices(h, pool, 0.10), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(match_candidate_indices(h, pool, 0.0).empty());
  EXPECT_THROW(match_candidate_indices(h, pool, -0.1), Error);
}

TEST(Compositor, Validation) {
  EXPECT_THROW(HealthySample("h", Image(4, 4), Mask(4, 4, 0)), Error);
  EXPECT_THROW(HealthySample("h", Image(4, 4), Mask(5, 4, 1)), Error);
  EXPECT_EQ(parse_healthy_source("stylegan2ada"), HealthySource::stylegan2ada);
  EXPECT_THROW(parse_healthy_source("vae"), Error);
  const auto h = square_healthy(1000);
  const auto l = square_lesion(1200, "x");
  EXPECT_THROW(compose(CompositeRecipe{&h, &l}), Error);
  const auto ok = square_lesion(1000, "y");
  EXPECT_THROW(compose(CompositeRecipe{&h, &ok, false, 1.0}), Error);
  EXPECT_THROW(compose(CompositeRecipe{&h, &ok, false, 0.5, 4}), Error);
}

TEST(Compositor, DegenerateWhenNoLesionSurvives) {
  const auto h = square_healthy(100);
  Mask lung(64, 64, 0);
  for (std::size_t i = 0; i < 100; ++i) lung.pixels()[i] = 1;
  const LesionSample l("empty", Image(64, 64), Mask(64, 64, 0), lung);
  EXPECT_FALSE(composite_survives(h, l, false));
  try {
    compose(CompositeRecipe{&h, &l});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
  }
}

TEST(Compositor, ContainmentSizeRuleAndConservation) {
  Gen g(1);
  int accepted = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int size = g.integer(32, 56);
    const auto h = random_healthy(g, size, "h");
    const auto l = random_lesion(g, size, "l");
    CompositeRecipe r{&h, &l, g.coin(), g.real(0.2, 0.8), 2 * g.integer(0, 3) + 1, 0.10};
    if (!size_matched(l.area(), h.area(), r.size_tolerance)) {
      EXPECT_THROW(compose(r), Error);
      continue;
    }
    if (!composite_survives(h, l, r.flip_lesion)) continue;
    ++accepted;
    const double ratio = double(l.area()) / double(h.area());
    EXPECT_GE(ratio, 0.9 - 1e-12);
    EXPECT_LE(ratio, 1.1 + 1e-12);
    const auto cs = compose(r);
    ASSERT_EQ(cs.sample.labels, LabelSpace::binary);
    std::size_t lesion_px = 0;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const auto v = cs.sample.mask(x, y);
        ASSERT_LE(v, 1);
        if (v) {
          ++lesion_px;
          ASSERT_EQ(h.lung_mask(x, y), 1) << trial;
        }
      }
    ASSERT_GT(lesion_px, 0u);
    // Transplanted region: where the healthy image may differ from the input.
    Mask changed(size, size, 0);
    for (std::size_t i = 0; i < changed.size(); ++i)
      changed.pixels()[i] = cs.sample.image.pixels()[i] != h.image.pixels()[i];
    const int reach = r.smooth_kernel + 2;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        if (!changed(x, y)) continue;
        bool near_lung = false;
        for (int dy = -reach; dy <= reach && !near_lung; ++dy)
          for (int dx = -reach; dx <= reach; ++dx)
            if (h.lung_mask.contains(x + dx, y + dy) && h.lung_mask(x + dx, y + dy)) {
              near_lung = true;
              break;
            }
        ASSERT_TRUE(near_lung) << "pixel changed far from the lungs";
      }
  }
  EXPECT_GT(accepted, 100);
}

TEST(Compositor, FlipEquivalence) {
  Gen g(2);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 60; ++trial) {
    const int size = g.integer(30, 50);
    const auto h = random_healthy(g, size, "h");
    const auto l = random_lesion(g, size, "l");
    if (!size_matched(l.area(), h.area(), 0.10) || !composite_survives(h, l, true)) continue;
    const auto lf = l.flipped();
    const auto a = compose(CompositeRecipe{&h, &l, true}, "x");
    const auto b = compose(CompositeRecipe{&h, &lf, false}, "x");
    EXPECT_EQ(a.sample.image, b.sample.image);
    EXPECT_EQ(a.sample.mask, b.sample.mask);
    EXPECT_EQ(a.offset, b.offset);
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Compositor, OffsetAlignsBoxCentres) {
  Mask hl(20, 20, 0), ll(20, 20, 0);
  for (int y = 4; y <= 9; ++y)
    for (int x = 10; x <= 15; ++x) hl(x, y) = 1;
  for (int y = 2; y <= 7; ++y)
    for (int x = 1; x <= 6; ++x) ll(x, y) = 1;
  const HealthySample h("h", Image(20, 20, 10), hl);
  const LesionSample l("l", Image(20, 20, 210), ll, ll);
  const auto cs = compose(CompositeRecipe{&h, &l, false, 0.5, 1});
  EXPECT_EQ(cs.offset, (Offset{9, 2}));
  EXPECT_EQ(cs.sample.mask, hl);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) EXPECT_EQ(cs.sample.image(x, y), hl(x, y) ? 110 : 10);
  EXPECT_EQ(cs.provenance().dump(),
            R"({"healthy_id":"h","lesion_id":"l","flip":false,"offset":[9,2],"blend_weight":0.5})");
}

TEST(Expand, CountsAndProvenance) {
  Gen g(3);
  std::vector<HealthySample> hp;
  std::vector<LesionSample> lp;
  for (int i = 0; i < 12; ++i) hp.push_back(random_healthy(g, 40, "h" + std::to_string(i)));
  for (int i = 0; i < 12; ++i) lp.push_back(random_lesion(g, 40, "l" + std::to_string(i)));
  std::vector<Sample> train;
  for (int i = 0; i < 100; ++i) train.push_back(lungaug::testing::random_sample(g, 8, 8, "t" + std::to_string(i)));
  ExpandOptions opt;
  opt.retry_budget = 200;
  auto rng = derive_stream(5, "compose", 0, 0);
  const auto res = expand_offline(train, hp, lp, 0.2, rng, opt);
  EXPECT_EQ(res.samples.size(), 120u);
  EXPECT_EQ(res.composites.size(), 20u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(res.samples[i], train[i]);
  EXPECT_EQ(res.samples[100].sample_id, "composite_00000");

  auto rng2 = derive_stream(5, "compose", 0, 0);
  opt.jobs = 3;
  const auto again = expand_offline(train, hp, lp, 0.2, rng2, opt);
  ASSERT_EQ(again.composites.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(again.composites[i].provenance(), res.composites[i].provenance());
    EXPECT_EQ(again.composites[i].sample, res.composites[i].sample);
  }

  auto rng3 = derive_stream(5, "compose", 0, 0);
  std::vector<Sample> four(train.begin(), train.begin() + 4);
  EXPECT_EQ(expand_offline(four, hp, lp, 0.2, rng3).samples, four);
  EXPECT_EQ(expansion_count(100, 0.2), 20u);
  EXPECT_EQ(expansion_count(10, 0.3), 3u);
  EXPECT_THROW(expand_offline(train, hp, lp, 0.0, rng3), Error);
}

TEST(Expand, RetryBudgetExhaustionIsDataError) {
  const std::vector<std::size_t> ha{100, 100}, la{500};
  auto rng = derive_stream(1, "compose", 0, 0);
  try {
    draw_recipe_indices(1, ha, la, [](std::size_t, std::size_t) { return true; }, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::data);
  }
  // Survival failures consume budget the same way.
  int calls = 0;
  ExpandOptions opt;
  opt.retry_budget = 4;
  EXPECT_THROW(draw_recipe_indices(1, ha, std::vector<std::size_t>{100}, [&](std::size_t, std::size_t) {
    ++calls;
    return false;
  }, rng, opt),
               Error);
  EXPECT_EQ(calls, 5);
}
