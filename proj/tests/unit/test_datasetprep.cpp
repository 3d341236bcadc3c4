#include <gtest/gtest.h>

#include "lungaug/datasetprep.hpp"
#include "support/fixtures.hpp"

using namespace lungaug;
using lungaug::testing::Gen;

namespace {

const LabelMap lm("d", {{0, 0}, {1, 1}, {2, 2}, {3, 3}}, {2, 3}, {1});

Sample with_mask(std::vector<std::uint8_t> v, const std::string& id = "s") {
  const int n = static_cast<int>(v.size());
  return Sample(Image(n, 1), Mask(n, 1, std::move(v)), "d", id);
}

}  // namespace

namespace keyed {
struct Item {
  std::string id;
};
inline std::string sample_key(const Item& i) { return i.id; }
}  // namespace keyed

namespace {

std::vector<keyed::Item> ids(int n) {
  std::vector<keyed::Item> out;
  for (int i = 0; i < n; ++i) out.push_back({"id" + std::to_string(i)});
  return out;
}

std::vector<std::string> names(const std::vector<keyed::Item>& v) {
  std::vector<std::string> out;
  for (const auto& i : v) out.push_back(i.id);
  return out;
}

}  // namespace

TEST(Filter, Examples) {
  const auto r = filter_samples({with_mask({0, 0}, "bg"), with_mask({1, 1}, "lung"), with_mask({0, 2}, "ggo"),
                                 with_mask({3, 1}, "cons")},
                                lm);
  ASSERT_EQ(r.kept.size(), 2u);
  EXPECT_EQ(r.kept[0].sample_id, "ggo");
  EXPECT_EQ(r.kept[1].sample_id, "cons");
  EXPECT_EQ(r.removed.size(), 2u);
}

TEST(Filter, IdempotentPartition) {
  Gen g(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Sample> in;
    for (int i = 0; i < 20; ++i) {
      Mask m = g.coin(0.3) ? Mask(6, 6, 0) : lungaug::testing::random_label_mask(g, 6, 6, 3, 1);
      in.push_back(Sample(Image(6, 6), m, "d", std::to_string(i)));
    }
    const auto r = filter_samples(in, lm);
    EXPECT_EQ(r.kept.size() + r.removed.size(), in.size());
    const auto again = filter_samples(r.kept, lm);
    EXPECT_EQ(again.kept, r.kept);
    EXPECT_TRUE(again.removed.empty());
    for (const auto& s : r.removed) EXPECT_FALSE(has_lesion(s, lm));
  }
}

TEST(Remap, BinaryAndIdempotent) {
  const auto s = remap_binary(with_mask({0, 1, 2, 3}), lm);
  EXPECT_EQ(s.mask.buffer(), (std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_EQ(s.labels, LabelSpace::binary);
  EXPECT_EQ(remap_binary(s, lm), s);
  EXPECT_EQ(remap_binary(with_mask({0, 0}), lm).mask.buffer(), (std::vector<std::uint8_t>{0, 0}));
  EXPECT_THROW(remap_binary(with_mask({0, 9}), lm), Error);
}

TEST(Split, Sizes) {
  for (auto [n, train] : std::vector<std::pair<int, std::size_t>>{{100, 80}, {5, 4}, {7, 6}, {929, 744}}) {
    auto rng = derive_stream(1, "split/d", 0, 0);
    const auto r = split_pareto(ids(n), rng);
    EXPECT_EQ(r.train.size(), train);
    EXPECT_EQ(r.train.size() + r.test.size(), static_cast<std::size_t>(n));
  }
  auto rng = derive_stream(1, "split/d", 0, 0);
  EXPECT_THROW(split_pareto(ids(4), rng), Error);
}

TEST(Split, DeterministicPerSeed) {
  auto a = derive_stream(3, "split/d", 0, 0), b = derive_stream(3, "split/d", 0, 0), c = derive_stream(4, "split/d", 0, 0);
  const auto ra = split_pareto(ids(50), a), rb = split_pareto(ids(50), b), rc = split_pareto(ids(50), c);
  EXPECT_EQ(names(ra.train), names(rb.train));
  EXPECT_NE(names(ra.train), names(rc.train));
}

TEST(Folds, PartitionProperty) {
  Gen g(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = g.integer(2, 120), k = g.integer(2, std::min(n, 10));
    auto rng = derive_stream(trial, "folds/d", 0, 0);
    const auto items = ids(n);
    const std::vector<keyed::Item> test = {{"t0"}, {"t1"}};
    const auto plan = make_folds(items, k, rng, test);
    const auto sizes = plan.fold_sizes();
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
    std::set<std::string> seen;
    for (int f = 0; f < k; ++f)
      for (const auto& id : plan.fold_members(f)) EXPECT_TRUE(seen.insert(id).second);
    const auto all = names(items);
    EXPECT_EQ(seen, std::set<std::string>(all.begin(), all.end()));
    EXPECT_EQ(plan.test_ids.size(), 2u);
  }
  auto rng = derive_stream(1, "folds/d", 0, 0);
  EXPECT_EQ(make_folds(ids(81), 5, rng).fold_sizes(), (std::vector<std::size_t>{17, 16, 16, 16, 16}));
  EXPECT_THROW(make_folds(ids(4), 5, rng), Error);
  EXPECT_THROW(make_folds(ids(10), 1, rng), Error);
  EXPECT_THROW(make_folds(ids(10), 2, rng, std::vector<keyed::Item>{{"id3"}}), Error);
}

TEST(Balance, DatasetSizesExample) {
  const auto r = balance_factors({{"A", 9166}, {"B", 472}});
  EXPECT_EQ(r.largest, "A");
  EXPECT_EQ(r.at("A").factor, 1u);
  EXPECT_EQ(r.at("B").factor, 20u);
  EXPECT_EQ(r.at("B").replicated_size, 9440u);
  const auto eq = balance_factors({{"A", 10}, {"B", 10}});
  EXPECT_EQ(eq.at("A").factor, 1u);
  EXPECT_EQ(eq.at("B").factor, 1u);
  EXPECT_THROW(balance_factors({{"A", 10}}), Error);
  EXPECT_THROW(balance_factors({{"A", 10}, {"B", 0}}), Error);
}

TEST(Balance, MinimalityForRandomSizes) {
  Gen g(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::map<std::string, std::size_t> sizes;
    const int m = g.integer(2, 6);
    for (int i = 0; i < m; ++i) sizes["d" + std::to_string(i)] = g.integer(1, 20000);
    const auto r = balance_factors(sizes);
    const auto largest = r.at(r.largest).size;
    EXPECT_EQ(r.at(r.largest).factor, 1u);
    for (const auto& e : r.entries) {
      ASSERT_GE(e.factor, 1u);
      ASSERT_LT((e.factor - 1) * e.size, largest);
      ASSERT_LE(largest, e.factor * e.size);
      ASSERT_EQ(e.replicated_size, e.factor * e.size);
    }
  }
}

TEST(Balance, ReplicasAndBinaryRemap) {
  std::map<std::string, std::vector<Sample>> sets;
  sets["a"] = {with_mask({0, 2}, "a0"), with_mask({3, 1}, "a1"), with_mask({2, 2}, "a2")};
  sets["b"] = {with_mask({1, 2}, "b0")};
  const auto out = balance_unified(sets, {{"a", lm}, {"b", lm}});
  ASSERT_EQ(out.unified.size(), 6u);
  EXPECT_EQ(out.unified[3].item.sample_id, "b0");
  EXPECT_EQ(out.unified[5].replicate_index, 2);
  for (const auto& r : out.unified) EXPECT_EQ(r.item.labels, LabelSpace::binary);
  EXPECT_EQ(out.unified[1].item.mask.buffer(), (std::vector<std::uint8_t>{1, 0}));
  EXPECT_THROW(balance_unified(sets, {{"a", lm}}), Error);

  std::map<std::string, std::vector<ManifestRecord>> recs;
  recs["x"] = {{"x/images/1.png", "x/masks/1.png", "x", Split::train, 0, 0}};
  recs["y"] = {{"y/images/1.png", "y/masks/1.png", "y", Split::train, 0, 0},
               {"y/images/2.png", "y/masks/2.png", "y", Split::train, 1, 0}};
  const auto [manifest, report] = balance_manifest(recs);
  ASSERT_EQ(manifest.size(), 4u);
  EXPECT_EQ(manifest[0].replicate_index, 0);
  EXPECT_EQ(manifest[1].replicate_index, 1);
  EXPECT_EQ(report.largest, "y");
}
