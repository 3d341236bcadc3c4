#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lungaug/core/error.hpp"

namespace lungaug {

// Paired per-fold scores: x without augmentation, y with it.
struct PairedScores {
  std::vector<double> x;
  std::vector<double> y;
};

enum class WilcoxonMethod { exact, normal_approx };

// Which rank sum's lower tail is tested.
//   less:    p = P(W+ <= observed), alternative "d = x - y tends negative"
//   greater: p = P(W- <= observed), alternative "d tends positive"
enum class Alternative { less, greater };

struct TestResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n_effective = 0;
  double p_value = 1.0;
  bool reject_null = false;
  WilcoxonMethod method = WilcoxonMethod::exact;
};

inline constexpr std::size_t wilcoxon_exact_max_n = 25;

namespace detail {

// Mid-ranks of |d| (1-based); `tie_term` receives sum(t^3 - t) over tie groups.
inline std::vector<double> midranks(const std::vector<double>& absd, double* tie_term) {
  const std::size_t n = absd.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return absd[a] < absd[b]; });
  std::vector<double> ranks(n);
  *tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && absd[order[j + 1]] == absd[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    const double t = static_cast<double>(j - i + 1);
    *tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

// Number of sign assignments of ranks 1..n whose positive rank sum equals w,
// for every w in 0..n(n+1)/2.
inline std::vector<std::uint64_t> signed_rank_counts(std::size_t n) {
  const std::size_t max_w = n * (n + 1) / 2;
  std::vector<std::uint64_t> counts(max_w + 1, 0);
  counts[0] = 1;
  for (std::size_t r = 1; r <= n; ++r)
    for (std::size_t w = max_w; w >= r; --w) counts[w] += counts[w - r];
  return counts;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

// One-sided Wilcoxon signed-rank test on d = x - y. Zero differences are
// dropped; ties in |d| get mid-ranks. Exact null distribution (all 2^n sign
// assignments) for n <= 25 without ties, otherwise the normal approximation
// with tie-corrected variance and a 0.5 continuity correction.
inline TestResult wilcoxon_one_sided(const PairedScores& pairs, double alpha = 0.05,
                                     Alternative alt = Alternative::less) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("wilcoxon: alpha must lie in (0, 1)");
  if (pairs.x.size() != pairs.y.size() || pairs.x.empty())
    throw validation_error("wilcoxon: x and y must be non-empty and of equal length");

  std::vector<double> d;
  for (std::size_t i = 0; i < pairs.x.size(); ++i) {
    const double di = pairs.x[i] - pairs.y[i];
    if (!std::isfinite(di)) throw validation_error("wilcoxon: non-finite score");
    if (di != 0.0) d.push_back(di);
  }
  if (d.empty()) throw data_error("degenerate: identical scores");

  std::vector<double> absd(d.size());
  std::transform(d.begin(), d.end(), absd.begin(), [](double v) { return std::abs(v); });
  double tie_term = 0.0;
  const auto ranks = detail::midranks(absd, &tie_term);

  TestResult res;
  res.n_effective = d.size();
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];
  const double observed = alt == Alternative::less ? res.w_plus : res.w_minus;
  const auto n = res.n_effective;

  if (n <= wilcoxon_exact_max_n && tie_term == 0.0) {
    res.method = WilcoxonMethod::exact;
    const auto counts = detail::signed_rank_counts(n);
    // Without ties the ranks are integers and so is the observed sum.
    const auto w = static_cast<std::size_t>(std::llround(observed));
    std::uint64_t below = 0;
    for (std::size_t k = 0; k <= w && k < counts.size(); ++k) below += counts[k];
    res.p_value = static_cast<double>(below) / std::ldexp(1.0, static_cast<int>(n));
  } else {
    res.method = WilcoxonMethod::normal_approx;
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
      res.p_value = 1.0;
    } else {
      res.p_value = detail::normal_cdf((observed - mean + 0.5) / std::sqrt(var));
    }
    res.p_value = std::clamp(res.p_value, std::numeric_limits<double>::min(), 1.0);
  }
  res.reject_null = res.p_value < alpha;
  return res;
}

// ---------------------------------------------------------------------------
// Significance tables

struct CellKey {
  std::string technique;
  double probability = 0.0;
  std::string dataset;
  auto operator<=>(const CellKey&) const = default;
};

struct SignificanceCell {
  CellKey key;
  std::optional<TestResult> result;  // empty when the cell is degenerate
  std::string warning;
  bool highlight = false;
};

// One test per key; degenerate cells carry a warning instead of failing the
// table. Rows come out ordered by technique, probability, dataset.
//
// The same routine serves both comparisons: baseline-vs-augmented (x is the
// run without augmentation) and individual-vs-unified training (x is the
// single-dataset run).
inline std::vector<SignificanceCell> significance_table(const std::map<CellKey, PairedScores>& cells,
                                                        double alpha = 0.05) {
  std::vector<SignificanceCell> out;
  out.reserve(cells.size());
  for (const auto& [key, pairs] : cells) {
    SignificanceCell cell{key, std::nullopt, {}, false};
    try {
      cell.result = wilcoxon_one_sided(pairs, alpha);
      cell.highlight = cell.result->reject_null;
    } catch (const Error& e) {
      cell.warning = e.what();
    }
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace lungaug
