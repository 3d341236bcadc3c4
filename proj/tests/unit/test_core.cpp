#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "lungaug/core/error.hpp"
#include "lungaug/core/label_map.hpp"
#include "lungaug/core/manifest.hpp"
#include "lungaug/core/parallel.hpp"
#include "lungaug/core/png_io.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"
#include "lungaug/core/sample_io.hpp"
#include "support/fixtures.hpp"

using namespace lungaug;
using lungaug::testing::Gen;

TEST(Raster, RejectsBadDimensions) {
  EXPECT_THROW(Image(0, 4), Error);
  EXPECT_THROW(Image(3, 3, std::vector<std::uint8_t>(8)), Error);
  Image img(3, 2, 7);
  EXPECT_EQ(img.size(), 6u);
  EXPECT_EQ(img(2, 1), 7);
}

TEST(Raster, SampleRequiresMatchingDims) {
  EXPECT_THROW(Sample(Image(4, 4), Mask(4, 5), "d", "s"), Error);
}

TEST(Rng, MixAndHashKnownValues) {
  // splitmix64 first output from state 0 and FNV-1a of "a".
  EXPECT_EQ(detail::mix64(0), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(detail::fnv1a64("a"), 0xAF63DC4C8601EC8Cull);
}

TEST(Rng, StreamKeyMatchesDocumentedChain) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  std::uint64_t fnv = 0xCBF29CE484222325ull;
  for (char c : std::string("aug")) {
    fnv ^= static_cast<unsigned char>(c);
    fnv *= 0x100000001B3ull;
  }
  const auto expected = mix(mix(mix(mix(42) ^ fnv) ^ 3) ^ 7);
  EXPECT_EQ(stream_key(42, "aug", 3, 7), expected);
}

TEST(Rng, DeterministicAndDistinct) {
  auto a = derive_stream(42, "aug", 0, 0), b = derive_stream(42, "aug", 0, 0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  auto prefix = [](RngStream s) {
    std::vector<std::uint64_t> v;
    for (int i = 0; i < 16; ++i) v.push_back(s.next_u64());
    return v;
  };
  EXPECT_NE(prefix(derive_stream(42, "aug", 0, 0)), prefix(derive_stream(42, "aug", 0, 1)));
  EXPECT_NE(prefix(derive_stream(42, "aug", 0, 0)), prefix(derive_stream(43, "aug", 0, 0)));
  EXPECT_NE(prefix(derive_stream(42, "aug", 0, 0)), prefix(derive_stream(42, "gate", 0, 0)));
  EXPECT_NE(prefix(derive_stream(42, "aug", 0, 0)), prefix(derive_stream(42, "aug", 1, 0)));
}

TEST(Rng, NoSharedPrefixAcrossManyItems) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 5000; ++i) firsts.insert(derive_stream(1, "aug", 0, i).next_u64());
  EXPECT_EQ(firsts.size(), 5000u);
}

TEST(Rng, DistributionRanges) {
  auto r = derive_stream(5, "t", 0, 0);
  std::vector<int> hits(6, 0);
  double sum = 0;
  for (int i = 0; i < 60000; ++i) {
    const auto v = r.uniform_int(0, 5);
    ASSERT_GE(v, 0);
    ASSERT_LE(v, 5);
    ++hits[static_cast<std::size_t>(v)];
    const double u = r.uniform(-2.0, 3.0);
    ASSERT_GE(u, -2.0);
    ASSERT_LT(u, 3.0);
    sum += r.normal();
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
  EXPECT_NEAR(sum / 60000, 0.0, 0.03);
  EXPECT_EQ(r.uniform(1.5, 1.5), 1.5);
}

TEST(LabelMap, ValidatesAndTranslates) {
  const auto lm = LabelMap::from_json(nlohmann::json::parse(
      R"({"dataset_id": "d", "raw_to_class": {"0": 0, "128": 1, "255": 2}, "lesion_classes": [2], "lung_only_classes": [1]})"));
  Mask raw(3, 1, std::vector<std::uint8_t>{0, 128, 255});
  EXPECT_EQ(lm.translate(raw).buffer(), (std::vector<std::uint8_t>{0, 1, 2}));
  EXPECT_EQ(lm.encode(lm.translate(raw)), raw);
  Mask bad(1, 1, 7);
  try {
    lm.translate(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unknown label"), std::string::npos);
    EXPECT_EQ(e.kind(), ErrorKind::data);
  }
  EXPECT_THROW(LabelMap("d", {{0, 1}}, {}, {}), Error);          // 0 must be background
  EXPECT_THROW(LabelMap("d", {{0, 0}, {1, 1}}, {1}, {1}), Error);  // overlapping sets
  EXPECT_THROW(LabelMap::from_json(nlohmann::json::parse(
                   R"({"dataset_id": "d", "raw_to_class": {"0": 0}, "lesion_classes": [], "extra": 1})")),
               Error);
}

TEST(Png, RoundTripAndDeterministicBytes) {
  Gen g(3);
  const auto img = lungaug::testing::random_image(g, 17, 9);
  const auto a = encode_png(img), b = encode_png(img);
  EXPECT_EQ(a, b);
  EXPECT_EQ(decode_png<ImageTag>(a), img);
  EXPECT_THROW(decode_png<ImageTag>(std::vector<std::uint8_t>{1, 2, 3}), Error);
}

TEST(SampleIo, RoundTrip) {
  const auto dir = lungaug::testing::fresh_dir("sample_io");
  Gen g(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = g.integer(1, 40), h = g.integer(1, 40);
    Sample s(lungaug::testing::random_image(g, w, h), lungaug::testing::random_label_mask(g, w, h, 3, 3), "synthetic",
             "x" + std::to_string(trial));
    save_sample(s, dir / "images" / (s.sample_id + ".png"), dir / "masks" / (s.sample_id + ".png"));
    const auto back = load_sample(dir / "images" / (s.sample_id + ".png"), dir / "masks" / (s.sample_id + ".png"),
                                  LabelMap::identity("synthetic"));
    EXPECT_EQ(back, s);
    const auto bytes1 = read_file_bytes(dir / "images" / (s.sample_id + ".png"));
    save_sample(back, dir / "images" / (s.sample_id + ".png"), dir / "masks" / (s.sample_id + ".png"));
    EXPECT_EQ(read_file_bytes(dir / "images" / (s.sample_id + ".png")), bytes1);
  }
}

TEST(SampleIo, Errors) {
  const auto dir = lungaug::testing::fresh_dir("sample_io_err");
  write_png(Image(4, 4), dir / "a.png");
  write_png(Mask(4, 5), dir / "b.png");
  EXPECT_THROW(load_sample(dir / "a.png", dir / "b.png", LabelMap::identity("d")), Error);
  write_png(Mask(4, 4, 7), dir / "c.png");
  const LabelMap lm("d", {{0, 0}, {1, 1}, {2, 2}, {3, 3}}, {2}, {1});
  EXPECT_THROW(load_sample(dir / "a.png", dir / "c.png", lm), Error);
  lungaug::testing::write_text_file(dir / "blocker", "x");
  try {
    save_sample(Sample(Image(2, 2), Mask(2, 2), "d", "s"), dir / "blocker" / "i.png", dir / "blocker" / "m.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Manifest, RoundTripAndStrictness) {
  std::vector<ManifestRecord> recs = {{"a/images/x.png", "a/masks/x.png", "a", Split::train, 2, 0},
                                      {"a/images/y.png", "a/masks/y.png", "a", Split::test, std::nullopt, 0}};
  std::istringstream in(serialize_manifest(recs));
  EXPECT_EQ(parse_manifest(in), recs);
  auto parse_one = [](const std::string& s) {
    std::istringstream is(s);
    return parse_manifest(is);
  };
  EXPECT_THROW(parse_one(R"({"image_path":"x","mask_path":"y","dataset_id":"a","split":"train","fold":0,"replicate_index":0,"z":1})"),
               Error);
  EXPECT_THROW(parse_one(R"({"image_path":"x","mask_path":"y","dataset_id":"a","split":"test","fold":0,"replicate_index":0})"),
               Error);
  EXPECT_THROW(parse_one(R"({"image_path":"x","mask_path":"y","dataset_id":"a","split":"train","fold":null})"), Error);
}

TEST(Parallel, CoversAllIndicesAndRethrowsLowest) {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), 8, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 17 || i == 60) throw validation_error("at " + std::to_string(i));
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "at 17");
  }
}
