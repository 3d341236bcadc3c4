#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lungaug/core/error.hpp"
#include "lungaug/core/label_map.hpp"
#include "lungaug/core/manifest.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"

namespace lungaug {

inline std::string sample_key(const Sample& s) { return s.sample_id; }

// ---------------------------------------------------------------------------
// Filtering and class remap

inline bool has_lesion(const Sample& s, const LabelMap& label_map) {
  if (s.labels == LabelSpace::binary) {
    return std::any_of(s.mask.pixels().begin(), s.mask.pixels().end(),
                       [](std::uint8_t v) { return v == 1; });
  }
  bool lesion[256] = {};
  for (auto c : label_map.lesion_classes()) lesion[c] = true;
  return std::any_of(s.mask.pixels().begin(), s.mask.pixels().end(),
                     [&](std::uint8_t v) { return lesion[v]; });
}

struct FilterResult {
  std::vector<Sample> kept;
  std::vector<Sample> removed;
};

// Drops samples without a single lesion-class pixel: all-background masks
// and masks holding only lung annotation alike.
inline FilterResult filter_samples(std::vector<Sample> samples, const LabelMap& label_map) {
  FilterResult out;
  for (auto& s : samples) {
    if (has_lesion(s, label_map)) out.kept.push_back(std::move(s));
    else out.removed.push_back(std::move(s));
  }
  return out;
}

// Lesion classes -> 1, everything else -> 0. Already-binary samples pass
// through unchanged.
inline Sample remap_binary(const Sample& sample, const LabelMap& label_map) {
  if (sample.labels == LabelSpace::binary) return sample;
  std::uint8_t lut[256];
  bool known[256] = {};
  for (int v = 0; v < 256; ++v) {
    known[v] = label_map.is_class(static_cast<std::uint8_t>(v));
    lut[v] = label_map.is_lesion(static_cast<std::uint8_t>(v)) ? 1 : 0;
  }
  Sample out = sample;
  auto dst = out.mask.pixels();
  for (auto& v : dst) {
    if (!known[v]) {
      throw data_error("unknown label " + std::to_string(v) + " in sample '" + sample.sample_id +
                       "' for dataset '" + label_map.dataset_id() + "'");
    }
    v = lut[v];
  }
  out.labels = LabelSpace::binary;
  return out;
}

// ---------------------------------------------------------------------------
// Split and folds

template <typename T>
struct SplitResult {
  std::vector<T> train;
  std::vector<T> test;
};

// Seeded shuffle, then the first ceil(0.8 N) items train and the rest test.
template <typename T>
SplitResult<T> split_pareto(std::vector<T> items, RngStream& rng) {
  if (items.size() < 5) {
    throw validation_error("split_pareto: need at least 5 samples, got " + std::to_string(items.size()));
  }
  shuffle(items, rng);
  const std::size_t n_train = (4 * items.size() + 4) / 5;
  SplitResult<T> out;
  out.train.assign(std::make_move_iterator(items.begin()),
                   std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(n_train)));
  out.test.assign(std::make_move_iterator(items.begin() + static_cast<std::ptrdiff_t>(n_train)),
                  std::make_move_iterator(items.end()));
  return out;
}

struct FoldPlan {
  int k = 5;
  std::map<std::string, int> assignments;
  std::set<std::string> test_ids;

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (const auto& [id, f] : assignments) ++sizes[static_cast<std::size_t>(f)];
    return sizes;
  }

  std::vector<std::string> fold_members(int fold) const {
    std::vector<std::string> out;
    for (const auto& [id, f] : assignments)
      if (f == fold) out.push_back(id);
    return out;
  }
};

// Shuffles the training items and deals them round-robin into k folds.
template <typename T>
FoldPlan make_folds(const std::vector<T>& train, int k, RngStream& rng,
                    const std::vector<T>& test = {}) {
  if (k < 2) throw validation_error("make_folds: k must be >= 2");
  if (train.size() < static_cast<std::size_t>(k)) {
    throw validation_error("make_folds: k=" + std::to_string(k) + " exceeds training size " +
                           std::to_string(train.size()));
  }
  std::vector<std::string> ids;
  ids.reserve(train.size());
  for (const auto& item : train) ids.push_back(sample_key(item));
  FoldPlan plan;
  plan.k = k;
  for (const auto& item : test) plan.test_ids.insert(sample_key(item));
  shuffle(ids, rng);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (plan.test_ids.count(ids[i]))
      throw validation_error("make_folds: '" + ids[i] + "' is in both train and test");
    if (!plan.assignments.emplace(ids[i], static_cast<int>(i % static_cast<std::size_t>(k))).second)
      throw validation_error("make_folds: duplicate sample id '" + ids[i] + "'");
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Unified-set balancing

struct BalanceEntry {
  std::string dataset_id;
  std::size_t size = 0;
  std::size_t factor = 1;
  std::size_t replicated_size = 0;
};

struct BalanceReport {
  std::string largest;
  std::vector<BalanceEntry> entries;  // ordered by dataset id

  const BalanceEntry& at(const std::string& id) const {
    for (const auto& e : entries)
      if (e.dataset_id == id) return e;
    throw validation_error("balance report: no dataset '" + id + "'");
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["largest"] = largest;
    j["datasets"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
      j["datasets"].push_back({{"dataset_id", e.dataset_id},
                               {"size", e.size},
                               {"factor", e.factor},
                               {"replicated_size", e.replicated_size}});
    }
    return j;
  }
};

// n_i = ceil(|largest| / |x_i|). Ties for largest go to the first id in
// key order.
inline BalanceReport balance_factors(const std::map<std::string, std::size_t>& sizes) {
  if (sizes.size() < 2) throw validation_error("balance: need at least two datasets");
  BalanceReport report;
  std::size_t largest = 0;
  for (const auto& [id, n] : sizes) {
    if (n == 0) throw validation_error("balance: dataset '" + id + "' is empty");
    if (n > largest) {
      largest = n;
      report.largest = id;
    }
  }
  for (const auto& [id, n] : sizes) {
    const std::size_t factor = (largest + n - 1) / n;
    report.entries.push_back({id, n, factor, factor * n});
  }
  return report;
}

template <typename T>
struct Replica {
  T item;
  int replicate_index = 0;
};

template <typename T>
struct BalancedSet {
  std::vector<Replica<T>> unified;
  BalanceReport report;
};

// Concatenates the datasets in id order, each item repeated n_i times
// (replicate_index 0..n_i-1, copies adjacent).
template <typename T>
BalancedSet<T> balance_replicas(const std::map<std::string, std::vector<T>>& sets) {
  std::map<std::string, std::size_t> sizes;
  for (const auto& [id, items] : sets) sizes[id] = items.size();
  BalancedSet<T> out;
  out.report = balance_factors(sizes);
  for (const auto& [id, items] : sets) {
    const auto factor = out.report.at(id).factor;
    for (const auto& item : items)
      for (std::size_t r = 0; r < factor; ++r) out.unified.push_back({item, static_cast<int>(r)});
  }
  return out;
}

// Sample form: masks are remapped to background/lesion first.
inline BalancedSet<Sample> balance_unified(const std::map<std::string, std::vector<Sample>>& train_sets,
                                           const std::map<std::string, LabelMap>& label_maps) {
  std::map<std::string, std::vector<Sample>> binary;
  for (const auto& [id, items] : train_sets) {
    const auto lm = label_maps.find(id);
    if (lm == label_maps.end()) throw validation_error("balance: no label map for dataset '" + id + "'");
    auto& dst = binary[id];
    for (const auto& s : items) dst.push_back(remap_binary(s, lm->second));
  }
  return balance_replicas(binary);
}

// Manifest form: replication by record, replicate_index filled in.
inline std::pair<std::vector<ManifestRecord>, BalanceReport> balance_manifest(
    const std::map<std::string, std::vector<ManifestRecord>>& train_sets) {
  auto balanced = balance_replicas(train_sets);
  std::vector<ManifestRecord> out;
  out.reserve(balanced.unified.size());
  for (auto& rep : balanced.unified) {
    rep.item.replicate_index = rep.replicate_index;
    out.push_back(std::move(rep.item));
  }
  return {std::move(out), std::move(balanced.report)};
}

}  // namespace lungaug
