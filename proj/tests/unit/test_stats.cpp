#include <gtest/gtest.h>

#include "lungaug/stats.hpp"
#include "support/fixtures.hpp"

using namespace lungaug;
using lungaug::testing::Gen;

namespace {

PairedScores from_diffs(const std::vector<double>& d) {
  PairedScores p;
  for (double v : d) {
    p.x.push_back(0.5 + v);
    p.y.push_back(0.5);
  }
  return p;
}

// P(W+ <= observed) by walking all 2^n sign vectors over ranks 1..n.
double brute_force_p(const std::vector<double>& d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(d[a]) < std::abs(d[b]); });
  int observed = 0;
  for (std::size_t r = 0; r < n; ++r)
    if (d[order[r]] > 0) observed += static_cast<int>(r + 1);
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    int w = 0;
    for (std::size_t r = 0; r < n; ++r)
      if (mask >> r & 1) w += static_cast<int>(r + 1);
    hits += w <= observed;
  }
  return static_cast<double>(hits) / static_cast<double>(1ull << n);
}

std::vector<double> tie_free(Gen& g, int n) {
  std::vector<double> d;
  std::set<int> mags;
  while (static_cast<int>(d.size()) < n) {
    const int m = g.integer(1, 1000);
    if (!mags.insert(m).second) continue;
    d.push_back((g.coin() ? 1 : -1) * m / 1000.0);
  }
  return d;
}

}  // namespace

TEST(Wilcoxon, DerivedExamples) {
  const auto r3 = wilcoxon_one_sided(from_diffs({-1, -2, -3}));
  EXPECT_EQ(r3.w_plus, 0.0);
  EXPECT_EQ(r3.p_value, 0.125);
  EXPECT_FALSE(r3.reject_null);
  EXPECT_EQ(r3.method, WilcoxonMethod::exact);
  const auto r5 = wilcoxon_one_sided(from_diffs({-1, -2, -3, -4, -5}));
  EXPECT_EQ(r5.p_value, 0.03125);
  EXPECT_TRUE(r5.reject_null);
  EXPECT_EQ(r5.w_minus, 15.0);
  try {
    wilcoxon_one_sided(PairedScores{{0.3, 0.4}, {0.3, 0.4}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate: identical scores"), std::string::npos);
  }
  EXPECT_THROW(wilcoxon_one_sided(PairedScores{{1}, {}}), Error);
  EXPECT_THROW(wilcoxon_one_sided(from_diffs({1}), 0.0), Error);
}

TEST(Wilcoxon, ZerosDropped) {
  const auto r = wilcoxon_one_sided(from_diffs({0, -1, -2, 0, -3}));
  EXPECT_EQ(r.n_effective, 3u);
  EXPECT_EQ(r.p_value, 0.125);
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  Gen g(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = tie_free(g, g.integer(3, 12));
    const auto r = wilcoxon_one_sided(from_diffs(d));
    ASSERT_EQ(r.method, WilcoxonMethod::exact);
    ASSERT_EQ(r.p_value, brute_force_p(d));
    ASSERT_EQ(r.reject_null, r.p_value < 0.05);
  }
}

TEST(Wilcoxon, SwapSymmetry) {
  Gen g(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = tie_free(g, 4);
    const auto p = from_diffs(d);
    const PairedScores swapped{p.y, p.x};
    EXPECT_EQ(wilcoxon_one_sided(p, 0.05, Alternative::less).p_value,
              wilcoxon_one_sided(swapped, 0.05, Alternative::greater).p_value);
  }
}

TEST(Wilcoxon, MonotoneInNegativeShift) {
  Gen g(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto d = tie_free(g, g.integer(3, 30));
    const double before = wilcoxon_one_sided(from_diffs(d)).p_value;
    for (auto& v : d)
      if (v < 0) v -= g.real(0, 2);
    const double after = wilcoxon_one_sided(from_diffs(d)).p_value;
    EXPECT_LE(after, before + 1e-12);
    EXPECT_GT(after, 0.0);
    EXPECT_LE(after, 1.0);
  }
}

TEST(Wilcoxon, NormalApproximationWithTiesAndLargeN) {
  const auto tied = wilcoxon_one_sided(from_diffs({-1, -1, -2, -3, 1}));
  EXPECT_EQ(tied.method, WilcoxonMethod::normal_approx);
  // |d| = 1 three times: mid-rank 2 each, so W+ = 2.
  // var = 5*6*11/24 - (27-3)/48 = 13.25.
  const double z = (2.0 - 7.5 + 0.5) / std::sqrt(13.25);
  EXPECT_NEAR(tied.p_value, 0.5 * std::erfc(-z / std::sqrt(2.0)), 1e-15);
  std::vector<double> d;
  for (int i = 1; i <= 30; ++i) d.push_back(i % 4 == 0 ? i : -i);
  const auto big = wilcoxon_one_sided(from_diffs(d));
  EXPECT_EQ(big.method, WilcoxonMethod::normal_approx);
  EXPECT_LT(big.p_value, 0.05);
}

TEST(Significance, TableCellsAndWarnings) {
  EXPECT_TRUE(significance_table({}).empty());
  std::map<CellKey, PairedScores> cells;
  cells[{"Rotate", 0.1, "MedSeg"}] = from_diffs({-1, -2, -3, -4, -5});
  cells[{"Elastic", 0.3, "Zenodo"}] = PairedScores{{0.5, 0.5}, {0.5, 0.5}};
  const auto t = significance_table(cells);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].key.technique, "Elastic");
  EXPECT_FALSE(t[0].result);
  EXPECT_FALSE(t[0].warning.empty());
  EXPECT_TRUE(t[1].highlight);
}
