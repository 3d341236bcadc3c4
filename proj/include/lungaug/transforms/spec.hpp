#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lungaug/core/error.hpp"

namespace lungaug {

enum class TransformKind {
  CLAHE,
  CoarseDropout,
  ElasticTransform,
  Emboss,
  Flip,
  GaussianBlur,
  GridDistortion,
  GridDropout,
  ImageCompression,
  MedianBlur,
  OpticalDistortion,
  PiecewiseAffine,
  Posterize,
  RandomBrightnessContrast,
  RandomCrop,
  RandomGamma,
  RandomSnow,
  Rotate,
  Sharpen,
  ShiftScaleRotate,
};

inline constexpr std::array<TransformKind, 20> all_transform_kinds = {
    TransformKind::CLAHE,
    TransformKind::CoarseDropout,
    TransformKind::ElasticTransform,
    TransformKind::Emboss,
    TransformKind::Flip,
    TransformKind::GaussianBlur,
    TransformKind::GridDistortion,
    TransformKind::GridDropout,
    TransformKind::ImageCompression,
    TransformKind::MedianBlur,
    TransformKind::OpticalDistortion,
    TransformKind::PiecewiseAffine,
    TransformKind::Posterize,
    TransformKind::RandomBrightnessContrast,
    TransformKind::RandomCrop,
    TransformKind::RandomGamma,
    TransformKind::RandomSnow,
    TransformKind::Rotate,
    TransformKind::Sharpen,
    TransformKind::ShiftScaleRotate,
};

inline constexpr std::string_view kind_name(TransformKind k) {
  constexpr std::array<std::string_view, 20> names = {
      "CLAHE",          "CoarseDropout",
      "ElasticTransform", "Emboss",
      "Flip",           "GaussianBlur",
      "GridDistortion", "GridDropout",
      "ImageCompression", "MedianBlur",
      "OpticalDistortion", "PiecewiseAffine",
      "Posterize",      "RandomBrightnessContrast",
      "RandomCrop",     "RandomGamma",
      "RandomSnow",     "Rotate",
      "Sharpen",        "ShiftScaleRotate",
  };
  return names[static_cast<std::size_t>(k)];
}

inline TransformKind parse_kind(std::string_view name) {
  for (auto k : all_transform_kinds)
    if (kind_name(k) == name) return k;
  throw validation_error("unknown transform kind '" + std::string(name) + "'");
}

enum class TransformCategory { spatial, pixel };

// Spatial kinds move pixels and therefore warp the mask with the image;
// pixel kinds rewrite intensities only.
inline constexpr TransformCategory category(TransformKind k) {
  switch (k) {
    case TransformKind::ElasticTransform:
    case TransformKind::Flip:
    case TransformKind::GridDistortion:
    case TransformKind::OpticalDistortion:
    case TransformKind::PiecewiseAffine:
    case TransformKind::RandomCrop:
    case TransformKind::Rotate:
    case TransformKind::ShiftScaleRotate:
      return TransformCategory::spatial;
    default:
      return TransformCategory::pixel;
  }
}

// Closed interval a parameter is drawn from; lo == hi pins the value.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

namespace params {

struct Clahe {
  static constexpr TransformKind kind = TransformKind::CLAHE;
  Range clip_limit{1.0, 4.0};
  int tile_rows = 8;
  int tile_cols = 8;
  template <typename V> void fields(V& v) {
    v("clip_limit", clip_limit);
    v("tile_rows", tile_rows);
    v("tile_cols", tile_cols);
  }
  friend bool operator==(const Clahe&, const Clahe&) = default;
};

struct CoarseDropout {
  static constexpr TransformKind kind = TransformKind::CoarseDropout;
  int holes = 8;
  int hole_size = 8;
  template <typename V> void fields(V& v) {
    v("holes", holes);
    v("hole_size", hole_size);
  }
  friend bool operator==(const CoarseDropout&, const CoarseDropout&) = default;
};

struct Elastic {
  static constexpr TransformKind kind = TransformKind::ElasticTransform;
  double alpha = 34.0;
  double sigma = 4.0;
  template <typename V> void fields(V& v) {
    v("alpha", alpha);
    v("sigma", sigma);
  }
  friend bool operator==(const Elastic&, const Elastic&) = default;
};

struct Emboss {
  static constexpr TransformKind kind = TransformKind::Emboss;
  Range alpha{0.2, 0.5};
  Range strength{0.2, 0.5};
  template <typename V> void fields(V& v) {
    v("alpha", alpha);
    v("strength", strength);
  }
  friend bool operator==(const Emboss&, const Emboss&) = default;
};

struct Flip {
  static constexpr TransformKind kind = TransformKind::Flip;
  // Drawn uniformly per application from this list.
  std::vector<std::string> axes{"horizontal", "vertical", "both"};
  template <typename V> void fields(V& v) { v("axes", axes); }
  friend bool operator==(const Flip&, const Flip&) = default;
};

struct GaussianBlur {
  static constexpr TransformKind kind = TransformKind::GaussianBlur;
  std::vector<int> kernel_sizes{3, 5, 7};
  template <typename V> void fields(V& v) { v("kernel_sizes", kernel_sizes); }
  friend bool operator==(const GaussianBlur&, const GaussianBlur&) = default;
};

struct GridDistortion {
  static constexpr TransformKind kind = TransformKind::GridDistortion;
  int num_steps = 5;
  Range distort{-0.3, 0.3};
  template <typename V> void fields(V& v) {
    v("num_steps", num_steps);
    v("distort", distort);
  }
  friend bool operator==(const GridDistortion&, const GridDistortion&) = default;
};

struct GridDropout {
  static constexpr TransformKind kind = TransformKind::GridDropout;
  double ratio = 0.5;
  int unit_size = 32;
  template <typename V> void fields(V& v) {
    v("ratio", ratio);
    v("unit_size", unit_size);
  }
  friend bool operator==(const GridDropout&, const GridDropout&) = default;
};

struct ImageCompression {
  static constexpr TransformKind kind = TransformKind::ImageCompression;
  IntRange quality{99, 100};
  template <typename V> void fields(V& v) { v("quality", quality); }
  friend bool operator==(const ImageCompression&, const ImageCompression&) = default;
};

struct MedianBlur {
  static constexpr TransformKind kind = TransformKind::MedianBlur;
  std::vector<int> kernel_sizes{3, 5};
  template <typename V> void fields(V& v) { v("kernel_sizes", kernel_sizes); }
  friend bool operator==(const MedianBlur&, const MedianBlur&) = default;
};

struct OpticalDistortion {
  static constexpr TransformKind kind = TransformKind::OpticalDistortion;
  Range distort{-0.05, 0.05};
  Range shift{-0.05, 0.05};
  template <typename V> void fields(V& v) {
    v("distort", distort);
    v("shift", shift);
  }
  friend bool operator==(const OpticalDistortion&, const OpticalDistortion&) = default;
};

struct PiecewiseAffine {
  static constexpr TransformKind kind = TransformKind::PiecewiseAffine;
  int rows = 4;
  int cols = 4;
  // Control point jitter standard deviation as a fraction of the side.
  double scale = 0.03;
  template <typename V> void fields(V& v) {
    v("rows", rows);
    v("cols", cols);
    v("scale", scale);
  }
  friend bool operator==(const PiecewiseAffine&, const PiecewiseAffine&) = default;
};

struct Posterize {
  static constexpr TransformKind kind = TransformKind::Posterize;
  int bits = 4;
  template <typename V> void fields(V& v) { v("bits", bits); }
  friend bool operator==(const Posterize&, const Posterize&) = default;
};

struct RandomBrightnessContrast {
  static constexpr TransformKind kind = TransformKind::RandomBrightnessContrast;
  Range brightness{-0.2, 0.2};
  Range contrast{-0.2, 0.2};
  template <typename V> void fields(V& v) {
    v("brightness", brightness);
    v("contrast", contrast);
  }
  friend bool operator==(const RandomBrightnessContrast&, const RandomBrightnessContrast&) = default;
};

struct RandomCrop {
  static constexpr TransformKind kind = TransformKind::RandomCrop;
  int height = 410;
  int width = 410;
  template <typename V> void fields(V& v) {
    v("height", height);
    v("width", width);
  }
  friend bool operator==(const RandomCrop&, const RandomCrop&) = default;
};

struct RandomGamma {
  static constexpr TransformKind kind = TransformKind::RandomGamma;
  Range gamma{0.8, 1.2};
  template <typename V> void fields(V& v) { v("gamma", gamma); }
  friend bool operator==(const RandomGamma&, const RandomGamma&) = default;
};

struct RandomSnow {
  static constexpr TransformKind kind = TransformKind::RandomSnow;
  Range snow_point{0.1, 0.3};
  double brightness_coeff = 2.5;
  template <typename V> void fields(V& v) {
    v("snow_point", snow_point);
    v("brightness_coeff", brightness_coeff);
  }
  friend bool operator==(const RandomSnow&, const RandomSnow&) = default;
};

struct Rotate {
  static constexpr TransformKind kind = TransformKind::Rotate;
  Range angle{-90.0, 90.0};
  template <typename V> void fields(V& v) { v("angle", angle); }
  friend bool operator==(const Rotate&, const Rotate&) = default;
};

struct Sharpen {
  static constexpr TransformKind kind = TransformKind::Sharpen;
  Range alpha{0.2, 0.5};
  Range lightness{0.5, 1.0};
  template <typename V> void fields(V& v) {
    v("alpha", alpha);
    v("lightness", lightness);
  }
  friend bool operator==(const Sharpen&, const Sharpen&) = default;
};

struct ShiftScaleRotate {
  static constexpr TransformKind kind = TransformKind::ShiftScaleRotate;
  Range shift{-0.0625, 0.0625};
  Range scale{0.9, 1.1};
  Range angle{-45.0, 45.0};
  template <typename V> void fields(V& v) {
    v("shift", shift);
    v("scale", scale);
    v("angle", angle);
  }
  friend bool operator==(const ShiftScaleRotate&, const ShiftScaleRotate&) = default;
};

}  // namespace params

using TransformParams =
    std::variant<params::Clahe, params::CoarseDropout, params::Elastic, params::Emboss,
                 params::Flip, params::GaussianBlur, params::GridDistortion, params::GridDropout,
                 params::ImageCompression, params::MedianBlur, params::OpticalDistortion,
                 params::PiecewiseAffine, params::Posterize, params::RandomBrightnessContrast,
                 params::RandomCrop, params::RandomGamma, params::RandomSnow, params::Rotate,
                 params::Sharpen, params::ShiftScaleRotate>;

namespace detail {

template <std::size_t I = 0>
TransformParams default_params_for(TransformKind k) {
  if constexpr (I == std::variant_size_v<TransformParams>) {
    throw validation_error("no parameter schema for kind");
  } else {
    using P = std::variant_alternative_t<I, TransformParams>;
    if (P::kind == k) return P{};
    return default_params_for<I + 1>(k);
  }
}

inline void require(bool ok, TransformKind k, const std::string& msg) {
  if (!ok) throw validation_error(std::string(kind_name(k)) + ": " + msg);
}

inline bool finite_range(const Range& r) {
  return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi;
}

struct RangeChecker {
  TransformKind kind;
  void operator()(const char* name, Range& r) const {
    require(finite_range(r), kind, std::string(name) + " must be a finite range with lo <= hi");
  }
  void operator()(const char* name, IntRange& r) const {
    require(r.lo <= r.hi, kind, std::string(name) + " must have lo <= hi");
  }
  void operator()(const char* name, double& v) const {
    require(std::isfinite(v), kind, std::string(name) + " must be finite");
  }
  void operator()(const char*, int&) const {}
  void operator()(const char*, std::vector<int>&) const {}
  void operator()(const char*, std::vector<std::string>&) const {}
};

inline void validate_kind_specific(const TransformParams& p) {
  std::visit(
      [](const auto& q) {
        using P = std::decay_t<decltype(q)>;
        constexpr auto k = P::kind;
        if constexpr (std::is_same_v<P, params::Clahe>) {
          require(q.clip_limit.lo >= 1.0, k, "clip_limit must be >= 1");
          require(q.tile_rows > 0 && q.tile_cols > 0, k, "degenerate tile grid");
        } else if constexpr (std::is_same_v<P, params::CoarseDropout>) {
          require(q.holes >= 0, k, "holes must be >= 0");
          require(q.hole_size >= 1, k, "hole_size must be >= 1");
        } else if constexpr (std::is_same_v<P, params::Elastic>) {
          require(q.alpha >= 0.0, k, "alpha must be >= 0");
          require(q.sigma > 0.0, k, "sigma must be > 0");
        } else if constexpr (std::is_same_v<P, params::Emboss> || std::is_same_v<P, params::Sharpen>) {
          require(q.alpha.lo >= 0.0 && q.alpha.hi <= 1.0, k, "alpha must lie in [0,1]");
        } else if constexpr (std::is_same_v<P, params::Flip>) {
          require(!q.axes.empty(), k, "axes must be non-empty");
          for (const auto& a : q.axes)
            require(a == "horizontal" || a == "vertical" || a == "both", k,
                    "unknown axis '" + a + "'");
        } else if constexpr (std::is_same_v<P, params::GaussianBlur> ||
                             std::is_same_v<P, params::MedianBlur>) {
          require(!q.kernel_sizes.empty(), k, "kernel_sizes must be non-empty");
          for (int s : q.kernel_sizes) require(s >= 1 && s % 2 == 1, k, "kernel sizes must be odd");
        } else if constexpr (std::is_same_v<P, params::GridDistortion>) {
          require(q.num_steps >= 1, k, "num_steps must be >= 1");
          require(q.distort.lo > -1.0, k, "distort must stay above -1");
        } else if constexpr (std::is_same_v<P, params::GridDropout>) {
          require(q.ratio >= 0.0 && q.ratio < 1.0, k, "ratio must lie in [0,1)");
          require(q.unit_size >= 2, k, "unit_size must be >= 2");
        } else if constexpr (std::is_same_v<P, params::ImageCompression>) {
          require(q.quality.lo >= 1 && q.quality.hi <= 100, k, "quality must lie in 1..100");
        } else if constexpr (std::is_same_v<P, params::PiecewiseAffine>) {
          require(q.rows >= 2 && q.cols >= 2, k, "control lattice needs >= 2x2 points");
          require(q.scale >= 0.0, k, "scale must be >= 0");
        } else if constexpr (std::is_same_v<P, params::Posterize>) {
          require(q.bits >= 1 && q.bits <= 8, k, "bits must lie in 1..8");
        } else if constexpr (std::is_same_v<P, params::RandomCrop>) {
          require(q.height >= 1 && q.width >= 1, k, "crop size must be positive");
        } else if constexpr (std::is_same_v<P, params::RandomGamma>) {
          require(q.gamma.lo > 0.0, k, "gamma must be > 0");
        } else if constexpr (std::is_same_v<P, params::RandomSnow>) {
          require(q.snow_point.lo >= 0.0 && q.snow_point.hi <= 1.0, k,
                  "snow_point must lie in [0,1]");
          require(q.brightness_coeff >= 0.0, k, "brightness_coeff must be >= 0");
        } else if constexpr (std::is_same_v<P, params::ShiftScaleRotate>) {
          require(q.scale.lo > 0.0, k, "scale must be > 0");
        }
      },
      p);
}

struct JsonReader {
  const nlohmann::json& obj;
  TransformKind kind;
  std::set<std::string>* seen;

  template <typename T>
  void operator()(const char* name, T& field) const {
    if (!obj.contains(name)) return;
    seen->insert(name);
    const auto& j = obj.at(name);
    try {
      if constexpr (std::is_same_v<T, Range>) {
        if (j.is_number()) {
          field = {j.get<double>(), j.get<double>()};
        } else {
          const auto v = j.get<std::vector<double>>();
          require(v.size() == 2, kind, std::string(name) + " must be [lo, hi] or a number");
          field = {v[0], v[1]};
        }
      } else if constexpr (std::is_same_v<T, IntRange>) {
        if (j.is_number_integer()) {
          field = {j.get<int>(), j.get<int>()};
        } else {
          const auto v = j.get<std::vector<int>>();
          require(v.size() == 2, kind, std::string(name) + " must be [lo, hi] or an integer");
          field = {v[0], v[1]};
        }
      } else {
        field = j.get<T>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw validation_error(std::string(kind_name(kind)) + ": parameter '" + name + "': " + e.what());
    }
  }
};

struct JsonWriter {
  nlohmann::ordered_json* out;
  template <typename T>
  void operator()(const char* name, T& field) const {
    if constexpr (std::is_same_v<T, Range> || std::is_same_v<T, IntRange>) {
      (*out)[name] = {field.lo, field.hi};
    } else {
      (*out)[name] = field;
    }
  }
};

}  // namespace detail

inline TransformParams default_params(TransformKind k) { return detail::default_params_for(k); }

inline TransformKind kind_of(const TransformParams& p) {
  return std::visit([](const auto& q) { return std::decay_t<decltype(q)>::kind; }, p);
}

// A transform kind with its frozen parameter record.
class TransformSpec {
 public:
  explicit TransformSpec(TransformKind kind) : params_(default_params(kind)) {}
  explicit TransformSpec(TransformParams p) : params_(std::move(p)) { validate(); }

  // Reads {"kind": "...", "params": {...}}; omitted parameters take their
  // defaults, unknown parameter names are rejected.
  static TransformSpec from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
      throw validation_error("transform spec needs a string 'kind'");
    TransformSpec spec(parse_kind(j.at("kind").get<std::string>()));
    if (j.contains("params")) {
      const auto& p = j.at("params");
      if (!p.is_object()) throw validation_error("transform 'params' must be an object");
      std::set<std::string> seen;
      std::visit(
          [&](auto& q) {
            detail::JsonReader reader{p, spec.kind(), &seen};
            q.fields(reader);
          },
          spec.params_);
      for (auto it = p.begin(); it != p.end(); ++it) {
        if (!seen.count(it.key()))
          throw validation_error(std::string(kind_name(spec.kind())) + ": unknown parameter '" +
                                 it.key() + "'");
      }
    }
    spec.validate();
    return spec;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    auto copy = params_;
    std::visit(
        [&](auto& q) {
          detail::JsonWriter writer{&params};
          q.fields(writer);
        },
        copy);
    nlohmann::ordered_json j;
    j["kind"] = std::string(kind_name(kind()));
    j["params"] = params;
    return j;
  }

  TransformKind kind() const { return kind_of(params_); }
  TransformCategory category() const { return lungaug::category(kind()); }
  const TransformParams& params() const noexcept { return params_; }

  template <typename P>
  const P& get() const {
    return std::get<P>(params_);
  }

  void validate() const {
    auto copy = params_;
    std::visit(
        [&](auto& q) {
          detail::RangeChecker checker{kind()};
          q.fields(checker);
        },
        copy);
    detail::validate_kind_specific(params_);
  }

  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;

 private:
  TransformParams params_;
};

}  // namespace lungaug
