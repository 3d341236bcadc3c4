#pragma once

// Generators and fixture builders shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lungaug/core/png_io.hpp"
#include "lungaug/core/raster.hpp"
#include "lungaug/core/rng.hpp"

namespace lungaug::testing {

namespace fs = std::filesystem;

// Test-side generator; independent from the library's RngStream on purpose.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline Image random_image(Gen& g, int w, int h) {
  Image img(w, h);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(g.integer(0, 255));
  return img;
}

// Smooth-ish CT-like image: a gradient with noise, so warps move real content.
inline Image textured_image(Gen& g, int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img(x, y) = static_cast<std::uint8_t>(std::clamp(40 + (x * 150) / w + (y * 50) / h + g.integer(-20, 20), 0, 255));
  return img;
}

inline void fill_ellipse(Mask& m, double cx, double cy, double rx, double ry, std::uint8_t v) {
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const double dx = (x - cx) / rx, dy = (y - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) m(x, y) = v;
    }
}

// Mask with background 0 plus random blobs of labels 1..max_label.
inline Mask random_label_mask(Gen& g, int w, int h, int max_label = 3, int blobs = 4) {
  Mask m(w, h, 0);
  for (int b = 0; b < blobs; ++b)
    fill_ellipse(m, g.real(0, w), g.real(0, h), g.real(1.5, w / 3.0 + 1.5), g.real(1.5, h / 3.0 + 1.5),
                 static_cast<std::uint8_t>(g.integer(1, max_label)));
  m(0, 0) = 0;
  return m;
}

inline Mask random_binary_mask(Gen& g, int w, int h, double density) {
  Mask m(w, h, 0);
  for (auto& v : m.pixels()) v = g.coin(density) ? 1 : 0;
  return m;
}

inline Sample random_sample(Gen& g, int w, int h, const std::string& id = "s") {
  return Sample(textured_image(g, w, h), random_label_mask(g, w, h), "synthetic", id);
}

// Two lung ellipses; returns the lung mask (1 = lung).
inline Mask lung_mask(int w, int h, double cx, double cy, double rx, double ry) {
  Mask m(w, h, 0);
  fill_ellipse(m, cx - rx * 1.1, cy, rx, ry, 1);
  fill_ellipse(m, cx + rx * 1.1, cy, rx, ry, 1);
  return m;
}

// FNV-1a over sorted relative paths and file bytes of a directory tree.
inline std::uint64_t tree_hash(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(p[i]);
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& f : files) {
    const auto rel = f.lexically_relative(root).generic_string();
    feed(rel.data(), rel.size() + 1);
    const auto bytes = read_file_bytes(f);
    feed(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  return h;
}

inline void write_text_file(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

inline fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lungaug_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct FixtureSpec {
  std::string id;
  int count = 20;
  int empty_every = 0;  // every n-th sample has no lesion (0 = never)
};

// Synthetic data root: each dataset stores raw values {0, 50 = lung, 100 =
// GGO, 150 = consolidation} through a label map, images 32x32 with lungs and
// lesions inside them. Also writes a healthy pool with lung masks.
inline void write_fixture(const fs::path& root, const std::vector<FixtureSpec>& datasets, std::uint64_t seed,
                          int size = 32) {
  Gen g(seed);
  for (const auto& ds : datasets) {
    write_text_file(root / ds.id / "label_map.json",
                    R"({"dataset_id": ")" + ds.id +
                        R"(", "raw_to_class": {"0": 0, "50": 1, "100": 2, "150": 3}, "lesion_classes": [2, 3], "lung_only_classes": [1]})");
    for (int i = 0; i < ds.count; ++i) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "%s_%03d", ds.id.c_str(), i);
      const double rx = size * g.real(0.17, 0.19), ry = size * g.real(0.28, 0.32);
      Mask raw = lung_mask(size, size, size / 2.0, size / 2.0, rx, ry);
      for (auto& v : raw.pixels()) v = v ? 50 : 0;
      const bool lesion = !(ds.empty_every && i % ds.empty_every == 0);
      if (lesion) {
        const double lx = size / 2.0 + (g.coin() ? -1 : 1) * rx * 1.1;
        fill_ellipse(raw, lx + g.real(-1, 1), size / 2.0 + g.real(-2, 2), g.real(1.5, 3), g.real(1.5, 3),
                     g.coin() ? 100 : 150);
      }
      Image img = textured_image(g, size, size);
      write_png(img, root / ds.id / "images" / (std::string(stem) + ".png"));
      write_png(raw, root / ds.id / "masks" / (std::string(stem) + ".png"));
    }
  }
}

inline void write_healthy_pool(const fs::path& pool, int count, std::uint64_t seed, int size = 32) {
  Gen g(seed);
  for (int i = 0; i < count; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "healthy_%03d", i);
    const double rx = size * g.real(0.17, 0.19), ry = size * g.real(0.28, 0.32);
    write_png(textured_image(g, size, size), pool / "images" / (std::string(stem) + ".png"));
    write_png(lung_mask(size, size, size / 2.0 + g.real(-1, 1), size / 2.0, rx, ry),
              pool / "lungmasks" / (std::string(stem) + ".png"));
  }
}

}  // namespace lungaug::testing
