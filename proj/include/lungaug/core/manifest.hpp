#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lungaug/core/error.hpp"

namespace lungaug {

enum class Split { train, test };

inline std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw validation_error("manifest: split must be 'train' or 'test', got '" + s + "'");
}

struct ManifestRecord {
  std::string image_path;
  std::string mask_path;
  std::string dataset_id;
  Split split = Split::train;
  std::optional<int> fold;
  int replicate_index = 0;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

// Stable identity of a record: the image file stem.
inline std::string sample_key(const ManifestRecord& r) {
  return std::filesystem::path(r.image_path).stem().string();
}

inline nlohmann::ordered_json to_json(const ManifestRecord& r) {
  nlohmann::ordered_json j;
  j["image_path"] = r.image_path;
  j["mask_path"] = r.mask_path;
  j["dataset_id"] = r.dataset_id;
  j["split"] = to_string(r.split);
  j["fold"] = r.fold ? nlohmann::ordered_json(*r.fold) : nlohmann::ordered_json(nullptr);
  j["replicate_index"] = r.replicate_index;
  return j;
}

inline ManifestRecord record_from_json(const nlohmann::json& j) {
  static const std::set<std::string> fields = {"image_path", "mask_path", "dataset_id",
                                               "split",      "fold",      "replicate_index"};
  if (!j.is_object()) throw validation_error("manifest: record is not a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!fields.count(it.key()))
      throw validation_error("manifest: unknown field '" + it.key() + "'");
  }
  for (const auto& f : fields) {
    if (!j.contains(f)) throw validation_error("manifest: missing field '" + f + "'");
  }
  ManifestRecord r;
  try {
    r.image_path = j.at("image_path").get<std::string>();
    r.mask_path = j.at("mask_path").get<std::string>();
    r.dataset_id = j.at("dataset_id").get<std::string>();
    r.split = parse_split(j.at("split").get<std::string>());
    if (!j.at("fold").is_null()) r.fold = j.at("fold").get<int>();
    r.replicate_index = j.at("replicate_index").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("manifest: ") + e.what());
  }
  if (r.replicate_index < 0) throw validation_error("manifest: replicate_index must be >= 0");
  if (r.fold && *r.fold < 0) throw validation_error("manifest: fold must be >= 0");
  if (r.fold && r.split != Split::train)
    throw validation_error("manifest: fold is only valid for split=train");
  return r;
}

inline std::string serialize_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<ManifestRecord> parse_manifest(std::istream& in) {
  std::vector<ManifestRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open manifest " + path.string());
  return parse_manifest(in);
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestRecord>& records) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write manifest " + path.string());
  out << serialize_manifest(records);
}

}  // namespace lungaug
