#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "lungaug/core/error.hpp"
#include "lungaug/core/raster.hpp"

namespace lungaug {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Pixel confusion counts of two binary masks, lesion (1) positive.
inline ConfusionCounts confusion(const Mask& pred, const Mask& truth) {
  if (!pred.same_shape(truth)) throw validation_error("confusion: dimension mismatch");
  ConfusionCounts c;
  auto p = pred.pixels();
  auto t = truth.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 1 || t[i] > 1) throw validation_error("confusion: masks must be binary (0/1)");
    if (p[i] && t[i]) ++c.tp;
    else if (p[i]) ++c.fp;
    else if (t[i]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// tp / (tp + (fp + fn) / 2); 1 when both masks are empty.
inline double fscore(const ConfusionCounts& c) {
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) return 1.0;
  return static_cast<double>(c.tp) / (static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn) / 2.0);
}

// tp / (tp + fp + fn); 1 when both masks are empty.
inline double iou(const ConfusionCounts& c) {
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp + c.fn);
}

struct EvalRecord {
  std::string sample_id;
  ConfusionCounts counts;
  double fscore = 0.0;
  double iou = 0.0;
  // Grouping dimensions.
  std::string technique = "none";
  double probability = 0.0;
  std::string dataset;
  int fold = 0;

  static EvalRecord from_counts(std::string id, const ConfusionCounts& c) {
    EvalRecord r;
    r.sample_id = std::move(id);
    r.counts = c;
    r.fscore = lungaug::fscore(c);
    r.iou = lungaug::iou(c);
    return r;
  }
};

struct GroupKey {
  std::string technique;
  double probability = 0.0;
  std::string dataset;
  auto operator<=>(const GroupKey&) const = default;
};

struct FoldMean {
  GroupKey key;
  int fold = 0;
  std::size_t images = 0;
  double fscore = 0.0;
  double iou = 0.0;
  double micro_fscore = 0.0;
  double micro_iou = 0.0;
};

struct GroupMean {
  GroupKey key;
  std::size_t folds = 0;
  std::size_t images = 0;
  // Macro: per-image mean within each fold, then mean over folds.
  double fscore = 0.0;
  double iou = 0.0;
  // Micro: metrics of the pooled confusion counts.
  double micro_fscore = 0.0;
  double micro_iou = 0.0;
};

struct AggregateTable {
  std::vector<FoldMean> per_fold;
  std::vector<GroupMean> per_group;
};

inline AggregateTable aggregate(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw validation_error("aggregate: no records");
  struct Acc {
    std::size_t n = 0;
    double f = 0.0, j = 0.0;
    ConfusionCounts pooled;
  };
  std::map<std::tuple<GroupKey, int>, Acc> folds;
  for (const auto& r : records) {
    auto& a = folds[{GroupKey{r.technique, r.probability, r.dataset}, r.fold}];
    ++a.n;
    a.f += r.fscore;
    a.j += r.iou;
    a.pooled.tp += r.counts.tp;
    a.pooled.fp += r.counts.fp;
    a.pooled.fn += r.counts.fn;
    a.pooled.tn += r.counts.tn;
  }
  AggregateTable out;
  std::map<GroupKey, GroupMean> groups;
  std::map<GroupKey, ConfusionCounts> pooled;
  for (const auto& [key, a] : folds) {
    const auto& [group, fold] = key;
    FoldMean fm{group, fold, a.n, a.f / a.n, a.j / a.n, fscore(a.pooled), iou(a.pooled)};
    out.per_fold.push_back(fm);
    auto& g = groups[group];
    g.key = group;
    ++g.folds;
    g.images += a.n;
    g.fscore += fm.fscore;
    g.iou += fm.iou;
    auto& p = pooled[group];
    p.tp += a.pooled.tp;
    p.fp += a.pooled.fp;
    p.fn += a.pooled.fn;
    p.tn += a.pooled.tn;
  }
  for (auto& [key, g] : groups) {
    g.fscore /= static_cast<double>(g.folds);
    g.iou /= static_cast<double>(g.folds);
    g.micro_fscore = fscore(pooled[key]);
    g.micro_iou = iou(pooled[key]);
    out.per_group.push_back(g);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frechet distance between Gaussian fits of two embedding sets

struct EmbeddingSet {
  Eigen::MatrixXd features;  // n x d, one row per sample

  EmbeddingSet() = default;
  explicit EmbeddingSet(Eigen::MatrixXd f) : features(std::move(f)) { validate(); }

  Eigen::Index n() const noexcept { return features.rows(); }
  Eigen::Index d() const noexcept { return features.cols(); }

  void validate() const {
    if (n() < 2) throw validation_error("embedding set needs n >= 2 rows");
    if (d() < 1) throw validation_error("embedding set needs d >= 1 columns");
    if (!features.allFinite()) throw validation_error("embedding set has non-finite entries");
  }

  Eigen::VectorXd mean() const { return features.colwise().mean().transpose(); }

  // Unbiased sample covariance.
  Eigen::MatrixXd covariance() const {
    const Eigen::MatrixXd centered = features.rowwise() - features.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(n() - 1);
  }
};

namespace detail {

// Square root of a symmetric PSD matrix; eigenvalues below 1e-10 count as 0.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw data_error("eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) < 1e-10 ? 0.0 : std::sqrt(ev(i));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
// tr((S_a S_b)^{1/2}) is evaluated as tr((A^{1/2} S_b A^{1/2})^{1/2}) with
// A = S_a, which is similar to S_a S_b but symmetric.
inline double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.d() != b.d()) throw validation_error("frechet_distance: dimension mismatch");
  const Eigen::VectorXd dmu = a.mean() - b.mean();
  const Eigen::MatrixXd sa = a.covariance();
  const Eigen::MatrixXd sb = b.covariance();
  const Eigen::MatrixXd ra = detail::psd_sqrt(sa);
  Eigen::MatrixXd inner = ra * sb * ra;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner);
  if (es.info() != Eigen::Success) throw data_error("eigendecomposition failed");
  double tr_sqrt = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev >= 1e-10) tr_sqrt += std::sqrt(ev);
  }
  const double d = dmu.squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_sqrt;
  if (!std::isfinite(d)) throw data_error("frechet_distance: non-finite result");
  return std::max(d, 0.0);
}

// Embedding matrix file: first line "n d", then either n CSV rows of d
// values, or (binary form) n*d little-endian float64 values right after the
// header newline.
inline EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open embeddings " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  long long n = 0, d = 0;
  if (!(hs >> n >> d) || n < 2 || d < 1)
    throw validation_error(path.string() + ": header must be 'n d' with n >= 2, d >= 1");
  Eigen::MatrixXd m(n, d);
  const auto body_start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<long long>(in.tellg() - body_start);
  in.seekg(body_start);
  if (remaining == n * d * 8 && path.extension() != ".csv") {
    for (long long i = 0; i < n; ++i) {
      for (long long j = 0; j < d; ++j) {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        std::uint64_t bits = 0;
        for (int k = 7; k >= 0; --k) bits = (bits << 8) | b[k];
        double v;
        std::memcpy(&v, &bits, 8);
        m(i, j) = v;
      }
    }
  } else {
    std::string line;
    for (long long i = 0; i < n; ++i) {
      if (!std::getline(in, line)) throw validation_error(path.string() + ": fewer rows than declared");
      std::istringstream ls(line);
      std::string cell;
      for (long long j = 0; j < d; ++j) {
        if (!std::getline(ls, cell, ',')) throw validation_error(path.string() + ": short row " + std::to_string(i));
        try {
          m(i, j) = std::stod(cell);
        } catch (const std::exception&) {
          throw validation_error(path.string() + ": bad number '" + cell + "'");
        }
      }
    }
  }
  return EmbeddingSet(std::move(m));
}

}  // namespace lungaug
