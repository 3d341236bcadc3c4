#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lungaug/core/error.hpp"
#include "lungaug/core/parallel.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"
#include "lungaug/transforms/apply.hpp"
#include "lungaug/transforms/spec.hpp"

namespace lungaug {

// The application probabilities evaluated for every technique.
inline constexpr std::array<double, 6> preset_probabilities = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};

enum class GateMode {
  per_batch,  // one draw decides for the whole batch
  per_image,  // ablation: one draw per sample
};

struct AugmentationPlan {
  TransformSpec spec;
  double probability = 0.0;
  GateMode gate = GateMode::per_batch;

  AugmentationPlan(TransformSpec s, double p, GateMode g = GateMode::per_batch)
      : spec(std::move(s)), probability(p), gate(g) {
    validate();
  }

  void validate() const {
    if (!(probability >= 0.0 && probability <= 1.0))
      throw validation_error("probability must lie in [0, 1], got " + std::to_string(probability));
    spec.validate();
  }

  // {"kind": "...", "probability": p, "params": {...}, "gate": "batch"|"image"}
  static AugmentationPlan from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw validation_error("plan record must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      if (k != "kind" && k != "probability" && k != "params" && k != "gate")
        throw validation_error("plan record: unknown field '" + k + "'");
    }
    if (!j.contains("probability") || !j.at("probability").is_number())
      throw validation_error("plan record needs a numeric 'probability'");
    nlohmann::json spec_json = {{"kind", j.value("kind", nlohmann::json())}};
    if (j.contains("params")) spec_json["params"] = j.at("params");
    GateMode gate = GateMode::per_batch;
    if (j.contains("gate")) {
      const auto g = j.at("gate").get<std::string>();
      if (g == "image") gate = GateMode::per_image;
      else if (g != "batch") throw validation_error("plan record: gate must be 'batch' or 'image'");
    }
    return AugmentationPlan(TransformSpec::from_json(spec_json), j.at("probability").get<double>(), gate);
  }

  nlohmann::ordered_json to_json() const {
    auto j = spec.to_json();
    nlohmann::ordered_json out;
    out["kind"] = j["kind"];
    out["probability"] = probability;
    out["params"] = j["params"];
    out["gate"] = gate == GateMode::per_batch ? "batch" : "image";
    return out;
  }
};

// A transform configuration file holds one record or an array of records.
inline std::vector<AugmentationPlan> load_plans(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open transform config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("transform config " + path.string() + ": " + e.what());
  }
  std::vector<AugmentationPlan> plans;
  if (j.is_array()) {
    for (const auto& rec : j) plans.push_back(AugmentationPlan::from_json(rec));
  } else {
    plans.push_back(AugmentationPlan::from_json(j));
  }
  if (plans.empty()) throw validation_error("transform config " + path.string() + " is empty");
  return plans;
}

struct Batch {
  std::vector<Sample> samples;
  std::uint64_t epoch = 0;
  std::uint64_t batch_index = 0;

  friend bool operator==(const Batch&, const Batch&) = default;
};

// Stream key of a sample inside a batch.
constexpr std::uint64_t item_key(std::uint64_t batch_index, std::size_t position) noexcept {
  return (batch_index << 32) | static_cast<std::uint64_t>(position);
}

// The Bernoulli(p) batch gate.
inline bool batch_gate(const AugmentationPlan& plan, std::uint64_t master_seed, std::uint64_t epoch,
                       std::uint64_t batch_index) {
  auto rng = derive_stream(master_seed, "gate", epoch, batch_index);
  return rng.bernoulli(plan.probability);
}

inline bool image_gate(const AugmentationPlan& plan, std::uint64_t master_seed, std::uint64_t epoch,
                       std::uint64_t batch_index, std::size_t position) {
  auto rng = derive_stream(master_seed, "gate-image", epoch, item_key(batch_index, position));
  return rng.bernoulli(plan.probability);
}

// Which positions of a batch of n samples the gate opens for.
inline std::vector<char> gate_selection(const AugmentationPlan& plan, std::uint64_t master_seed, std::uint64_t epoch,
                                        std::uint64_t batch_index, std::size_t n) {
  std::vector<char> selected(n, 0);
  if (plan.gate == GateMode::per_batch) {
    if (batch_gate(plan, master_seed, epoch, batch_index)) std::fill(selected.begin(), selected.end(), 1);
  } else {
    for (std::size_t i = 0; i < n; ++i) selected[i] = image_gate(plan, master_seed, epoch, batch_index, i);
  }
  return selected;
}

// The transform applied to the sample at `position` of an opened batch.
inline Sample augment_item(const Sample& sample, const AugmentationPlan& plan, std::uint64_t master_seed,
                           std::uint64_t epoch, std::uint64_t batch_index, std::size_t position) {
  auto rng = derive_stream(master_seed, "aug", epoch, item_key(batch_index, position));
  return apply_transform(sample, plan.spec, rng);
}

// Online augmentation of one batch. When the gate opens every sample gets
// its own item stream (fresh parameter draws per image); sample order is
// kept. `jobs` only changes wall time, never the result.
inline Batch augment_batch(const Batch& batch, const AugmentationPlan& plan, std::uint64_t master_seed,
                           int jobs = 1) {
  if (batch.samples.empty()) throw validation_error("augment_batch: empty batch");
  for (const auto& s : batch.samples) {
    if (!s.image.same_shape(batch.samples.front().image))
      throw validation_error("augment_batch: samples in a batch must share dimensions");
  }
  Batch out = batch;
  const auto selected = gate_selection(plan, master_seed, batch.epoch, batch.batch_index, batch.samples.size());
  parallel_for(batch.samples.size(), jobs, [&](std::size_t i) {
    if (!selected[i]) return;
    out.samples[i] = augment_item(batch.samples[i], plan, master_seed, batch.epoch, batch.batch_index, i);
  });
  return out;
}

// Pull-based streaming form: chunks the source into batches of batch_size
// (numbered 0, 1, ...), augments each and yields samples in input order.
class AugmentedStream {
 public:
  using Source = std::function<std::optional<Sample>()>;

  AugmentedStream(Source source, AugmentationPlan plan, std::size_t batch_size, std::uint64_t master_seed,
                  std::uint64_t epoch = 0, int jobs = 1)
      : source_(std::move(source)),
        plan_(std::move(plan)),
        batch_size_(batch_size),
        seed_(master_seed),
        epoch_(epoch),
        jobs_(jobs) {
    if (batch_size_ < 1) throw validation_error("augment_stream: batch_size must be >= 1");
  }

  std::optional<Sample> next() {
    if (pos_ == current_.size()) {
      if (!refill()) return std::nullopt;
    }
    return std::move(current_[pos_++]);
  }

 private:
  bool refill() {
    Batch batch{{}, epoch_, next_batch_};
    while (batch.samples.size() < batch_size_) {
      auto s = source_();
      if (!s) break;
      batch.samples.push_back(std::move(*s));
    }
    if (batch.samples.empty()) return false;
    ++next_batch_;
    current_ = augment_batch(batch, plan_, seed_, jobs_).samples;
    pos_ = 0;
    return true;
  }

  Source source_;
  AugmentationPlan plan_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::uint64_t epoch_;
  int jobs_;
  std::uint64_t next_batch_ = 0;
  std::vector<Sample> current_;
  std::size_t pos_ = 0;
};

inline AugmentedStream augment_stream(std::vector<Sample> samples, const AugmentationPlan& plan,
                                      std::size_t batch_size, std::uint64_t master_seed,
                                      std::uint64_t epoch = 0, int jobs = 1) {
  auto items = std::make_shared<std::vector<Sample>>(std::move(samples));
  auto index = std::make_shared<std::size_t>(0);
  return AugmentedStream(
      [items, index]() -> std::optional<Sample> {
        if (*index >= items->size()) return std::nullopt;
        return std::move((*items)[(*index)++]);
      },
      plan, batch_size, master_seed, epoch, jobs);
}

inline std::vector<Sample> drain(AugmentedStream& stream) {
  std::vector<Sample> out;
  while (auto s = stream.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace lungaug
