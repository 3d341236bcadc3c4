#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "lungaug/core/error.hpp"
#include "lungaug/core/raster.hpp"

namespace lungaug {

// Per-dataset translation from the raw values stored in a dataset's mask
// files to canonical class ids (0 = background). Lesion classes are the ones
// that survive the binary remap; lung-only classes mark masks that carry lung
// annotation but no lesion.
class LabelMap {
 public:
  LabelMap() = default;

  LabelMap(std::string dataset_id, const std::vector<std::pair<int, int>>& raw_to_class,
           std::set<std::uint8_t> lesion_classes, std::set<std::uint8_t> lung_only_classes)
      : dataset_id_(std::move(dataset_id)),
        lesion_(std::move(lesion_classes)),
        lung_only_(std::move(lung_only_classes)) {
    for (auto [raw, cls] : raw_to_class) {
      if (raw < 0 || raw > 255 || cls < 0 || cls > 255) {
        throw validation_error("label map '" + dataset_id_ + "': values must be in 0..255");
      }
      if (table_[raw] && *table_[raw] != cls) {
        throw validation_error("label map '" + dataset_id_ + "': raw value " +
                               std::to_string(raw) + " mapped twice");
      }
      table_[raw] = static_cast<std::uint8_t>(cls);
    }
    validate();
  }

  // {"dataset_id": "...", "raw_to_class": {"0": 0, "128": 2},
  //  "lesion_classes": [2], "lung_only_classes": [1]}
  static LabelMap from_json(const nlohmann::json& j) {
    static const std::set<std::string> allowed = {"dataset_id", "raw_to_class",
                                                  "lesion_classes", "lung_only_classes"};
    try {
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
          throw validation_error("label map: unknown field '" + it.key() + "'");
      }
      std::vector<std::pair<int, int>> pairs;
      for (auto it = j.at("raw_to_class").begin(); it != j.at("raw_to_class").end(); ++it) {
        pairs.emplace_back(std::stoi(it.key()), it.value().get<int>());
      }
      std::set<std::uint8_t> lesion, lung;
      for (int v : j.at("lesion_classes").get<std::vector<int>>()) lesion.insert(checked_u8(v));
      if (j.contains("lung_only_classes")) {
        for (int v : j.at("lung_only_classes").get<std::vector<int>>()) lung.insert(checked_u8(v));
      }
      return LabelMap(j.at("dataset_id").get<std::string>(), pairs, std::move(lesion),
                      std::move(lung));
    } catch (const nlohmann::json::exception& e) {
      throw validation_error(std::string("label map: ") + e.what());
    } catch (const std::invalid_argument&) {
      throw validation_error("label map: raw_to_class keys must be integers");
    }
  }

  static LabelMap load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open label map " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("label map " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

  // Masks written by this toolkit in binary form (composites, binary remaps).
  static LabelMap binary(std::string dataset_id) {
    return LabelMap(std::move(dataset_id), {{0, 0}, {1, 1}}, {1}, {});
  }

  // Raw values are already canonical ids.
  static LabelMap identity(std::string dataset_id, std::set<std::uint8_t> lesion_classes = {},
                           std::set<std::uint8_t> lung_only_classes = {}) {
    std::vector<std::pair<int, int>> pairs;
    for (int v = 0; v < 256; ++v) pairs.emplace_back(v, v);
    return LabelMap(std::move(dataset_id), pairs, std::move(lesion_classes),
                    std::move(lung_only_classes));
  }

  nlohmann::json to_json() const {
    nlohmann::json raw = nlohmann::json::object();
    for (int v = 0; v < 256; ++v)
      if (table_[v]) raw[std::to_string(v)] = *table_[v];
    return {{"dataset_id", dataset_id_},
            {"raw_to_class", raw},
            {"lesion_classes", std::vector<int>(lesion_.begin(), lesion_.end())},
            {"lung_only_classes", std::vector<int>(lung_only_.begin(), lung_only_.end())}};
  }

  const std::string& dataset_id() const noexcept { return dataset_id_; }
  const std::set<std::uint8_t>& lesion_classes() const noexcept { return lesion_; }
  const std::set<std::uint8_t>& lung_only_classes() const noexcept { return lung_only_; }

  std::optional<std::uint8_t> class_of(std::uint8_t raw) const noexcept { return table_[raw]; }

  bool is_class(std::uint8_t cls) const noexcept {
    for (const auto& c : table_)
      if (c && *c == cls) return true;
    return false;
  }
  bool is_lesion(std::uint8_t cls) const noexcept { return lesion_.count(cls) != 0; }
  bool is_lung_only(std::uint8_t cls) const noexcept { return lung_only_.count(cls) != 0; }

  // Smallest raw value for a class; makes canonical masks writable in the
  // dataset's own encoding so they reload through this map unchanged.
  std::uint8_t raw_of(std::uint8_t cls) const {
    for (int v = 0; v < 256; ++v)
      if (table_[v] && *table_[v] == cls) return static_cast<std::uint8_t>(v);
    throw data_error("label map '" + dataset_id_ + "': no raw value for class " +
                     std::to_string(cls));
  }

  Mask translate(const Mask& raw) const {
    Mask out(raw.width(), raw.height());
    auto src = raw.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const auto cls = table_[src[i]];
      if (!cls) {
        throw data_error("unknown label " + std::to_string(src[i]) + " for dataset '" +
                         dataset_id_ + "'");
      }
      dst[i] = *cls;
    }
    return out;
  }

  Mask encode(const Mask& canonical) const {
    std::array<int, 256> lut;
    lut.fill(-1);
    Mask out(canonical.width(), canonical.height());
    auto src = canonical.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
      int& r = lut[src[i]];
      if (r < 0) r = raw_of(src[i]);
      dst[i] = static_cast<std::uint8_t>(r);
    }
    return out;
  }

 private:
  static std::uint8_t checked_u8(int v) {
    if (v < 0 || v > 255) throw validation_error("label map: class id out of range");
    return static_cast<std::uint8_t>(v);
  }

  void validate() const {
    if (!table_[0] || *table_[0] != 0) {
      throw validation_error("label map '" + dataset_id_ + "': raw 0 must map to background 0");
    }
    for (auto c : lesion_) {
      if (lung_only_.count(c))
        throw validation_error("label map '" + dataset_id_ +
                               "': lesion and lung-only classes overlap");
      if (c == 0) throw validation_error("label map '" + dataset_id_ + "': background cannot be a lesion");
    }
  }

  std::string dataset_id_;
  std::array<std::optional<std::uint8_t>, 256> table_{};
  std::set<std::uint8_t> lesion_;
  std::set<std::uint8_t> lung_only_;
};

}  // namespace lungaug
