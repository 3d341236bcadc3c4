// Streams a handful of synthetic samples through a gated Rotate plan and
// prints which batches the gate opened.

#include <cstdio>

#include "lungaug/scheduler.hpp"

int main() {
  using namespace lungaug;
  std::vector<Sample> samples;
  for (int i = 0; i < 12; ++i) {
    Image img(32, 32);
    Mask mask(32, 32);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        img(x, y) = static_cast<std::uint8_t>(x * 8 + i);
        mask(x, y) = (x > 8 && x < 20 && y > 10 && y < 18) ? 2 : 0;
      }
    samples.emplace_back(img, mask, "demo", "demo_" + std::to_string(i));
  }
  const auto plan = AugmentationPlan::from_json(nlohmann::json::parse(R"({"kind": "Rotate", "probability": 0.5})"));
  const std::size_t batch_size = 4;
  const auto originals = samples;
  auto stream = augment_stream(samples, plan, batch_size, 42);
  std::size_t i = 0;
  while (auto s = stream.next()) {
    std::printf("batch %zu  %-8s  %s\n", i / batch_size, s->sample_id.c_str(),
                *s == originals[i] ? "unchanged" : "rotated");
    ++i;
  }
}
