#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lungaug/core/error.hpp"
#include "lungaug/core/label_map.hpp"

namespace lungaug::cli {

namespace fs = std::filesystem;

inline constexpr const char* tool_version = "0.1.0";

enum class BalanceOn { train, whole };

struct ComposeConfig {
  fs::path healthy_pool;      // <pool>/images, <pool>/lungmasks
  std::string lesion_dataset;  // dataset whose train records provide lesions
  fs::path lesion_lungmasks;   // optional <dir>/<stem>.png lung masks
  std::string healthy_source = "other";
  double fraction = 0.1;
  bool flip = false;
  double blend_weight = 0.5;
  int smooth_kernel = 5;
  double size_tolerance = 0.10;
  int retry_budget = 32;
};

struct RunConfig {
  fs::path data_root = ".";
  fs::path out = "lungaug-out";
  std::uint64_t seed = 0;
  int jobs = 1;
  std::vector<std::string> datasets;            // empty: every dataset under data_root
  std::map<std::string, fs::path> label_maps;   // default <root>/<id>/label_map.json
  fs::path plan;
  std::vector<double> probabilities;
  int k = 5;
  BalanceOn balance_on = BalanceOn::train;
  std::size_t batch_size = 8;
  double alpha = 0.05;
  ComposeConfig compose;

  void validate() const {
    if (jobs < 1) throw validation_error("jobs must be >= 1");
    if (k < 2) throw validation_error("k must be >= 2");
    if (batch_size < 1) throw validation_error("batch_size must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("alpha must lie in (0, 1)");
    for (double p : probabilities)
      if (!(p >= 0.0 && p <= 1.0)) throw validation_error("probabilities must lie in [0, 1]");
  }

  LabelMap label_map_for(const std::string& dataset) const {
    if (dataset == "composite") return LabelMap::binary("composite");
    const auto it = label_maps.find(dataset);
    const fs::path p = it != label_maps.end() ? it->second : data_root / dataset / "label_map.json";
    if (!fs::exists(p)) throw validation_error("no label map for dataset '" + dataset + "' (looked for " + p.string() + ")");
    auto lm = LabelMap::load(p);
    if (lm.dataset_id() != dataset)
      throw validation_error(p.string() + ": dataset_id '" + lm.dataset_id() + "' does not match '" + dataset + "'");
    return lm;
  }
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw validation_error(where + ": unknown field '" + it.key() + "'");
}

}  // namespace detail

// Relative paths in the file are taken relative to the file's directory.
inline RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw validation_error("config must be a JSON object");
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  RunConfig c;
  try {
    detail::reject_unknown(j,
                           {"data_root", "out", "seed", "jobs", "datasets", "label_maps", "plan", "probabilities", "k",
                            "balance_on", "batch_size", "alpha", "compose"},
                           "config");
    if (j.contains("data_root")) c.data_root = detail::resolve(base, j["data_root"].get<std::string>());
    if (j.contains("out")) c.out = detail::resolve(base, j["out"].get<std::string>());
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
    if (j.contains("datasets")) c.datasets = j["datasets"].get<std::vector<std::string>>();
    if (j.contains("label_maps"))
      for (auto it = j["label_maps"].begin(); it != j["label_maps"].end(); ++it)
        c.label_maps[it.key()] = detail::resolve(base, it.value().get<std::string>());
    if (j.contains("plan")) c.plan = detail::resolve(base, j["plan"].get<std::string>());
    if (j.contains("probabilities")) c.probabilities = j["probabilities"].get<std::vector<double>>();
    if (j.contains("k")) c.k = j["k"].get<int>();
    if (j.contains("balance_on")) {
      const auto b = j["balance_on"].get<std::string>();
      if (b == "train") c.balance_on = BalanceOn::train;
      else if (b == "whole") c.balance_on = BalanceOn::whole;
      else throw validation_error("balance_on must be 'train' or 'whole'");
    }
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
    if (j.contains("compose")) {
      const auto& cj = j["compose"];
      detail::reject_unknown(cj,
                             {"healthy_pool", "lesion_dataset", "lesion_lungmasks", "healthy_source", "fraction", "flip",
                              "blend_weight", "smooth_kernel", "size_tolerance", "retry_budget"},
                             "config.compose");
      auto& cc = c.compose;
      if (cj.contains("healthy_pool")) cc.healthy_pool = detail::resolve(base, cj["healthy_pool"].get<std::string>());
      if (cj.contains("lesion_dataset")) cc.lesion_dataset = cj["lesion_dataset"].get<std::string>();
      if (cj.contains("lesion_lungmasks"))
        cc.lesion_lungmasks = detail::resolve(base, cj["lesion_lungmasks"].get<std::string>());
      if (cj.contains("healthy_source")) cc.healthy_source = cj["healthy_source"].get<std::string>();
      if (cj.contains("fraction")) cc.fraction = cj["fraction"].get<double>();
      if (cj.contains("flip")) cc.flip = cj["flip"].get<bool>();
      if (cj.contains("blend_weight")) cc.blend_weight = cj["blend_weight"].get<double>();
      if (cj.contains("smooth_kernel")) cc.smooth_kernel = cj["smooth_kernel"].get<int>();
      if (cj.contains("size_tolerance")) cc.size_tolerance = cj["size_tolerance"].get<double>();
      if (cj.contains("retry_budget")) cc.retry_budget = cj["retry_budget"].get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("config " + path.string() + ": " + e.what());
  }
  return c;
}

}  // namespace lungaug::cli
