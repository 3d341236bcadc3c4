#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lungaug/cli/config.hpp"
#include "lungaug/cli/csv.hpp"
#include "lungaug/compositor.hpp"
#include "lungaug/core/label_map.hpp"
#include "lungaug/core/manifest.hpp"
#include "lungaug/core/parallel.hpp"
#include "lungaug/core/png_io.hpp"
#include "lungaug/core/sample_io.hpp"
#include "lungaug/datasetprep.hpp"
#include "lungaug/metrics.hpp"
#include "lungaug/scheduler.hpp"
#include "lungaug/stats.hpp"

namespace lungaug::cli {

// ---------------------------------------------------------------------------
// Shared helpers

inline std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw io_error("missing directory " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string rel_to_root(const fs::path& p, const fs::path& root) {
  return fs::absolute(p).lexically_normal().lexically_relative(fs::absolute(root).lexically_normal()).generic_string();
}

inline fs::path resolve_record_path(const RunConfig& cfg, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : (cfg.data_root / p).lexically_normal();
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot write " + path.string());
  f << text;
}

class LabelMapCache {
 public:
  explicit LabelMapCache(const RunConfig& cfg) : cfg_(cfg) {}
  const LabelMap& get(const std::string& dataset) {
    std::lock_guard lock(mu_);
    auto it = maps_.find(dataset);
    if (it == maps_.end()) it = maps_.emplace(dataset, cfg_.label_map_for(dataset)).first;
    return it->second;
  }

 private:
  const RunConfig& cfg_;
  std::mutex mu_;
  std::map<std::string, LabelMap> maps_;
};

inline Sample load_record(const RunConfig& cfg, const ManifestRecord& r, LabelMapCache& maps) {
  return load_sample(resolve_record_path(cfg, r.image_path), resolve_record_path(cfg, r.mask_path),
                     maps.get(r.dataset_id));
}

inline std::vector<std::string> discover_datasets(const RunConfig& cfg) {
  if (!cfg.datasets.empty()) return cfg.datasets;
  if (!fs::is_directory(cfg.data_root)) throw io_error("data root " + cfg.data_root.string() + " is not a directory");
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(cfg.data_root))
    if (e.is_directory() && fs::is_directory(e.path() / "images")) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw validation_error("no datasets under " + cfg.data_root.string());
  return out;
}

inline fs::path default_manifest(const RunConfig& cfg) { return cfg.out / "manifests" / "unified.jsonl"; }

inline std::vector<ManifestRecord> load_manifest_arg(const RunConfig& cfg, const fs::path& given) {
  const fs::path p = given.empty() ? default_manifest(cfg) : given;
  if (!fs::exists(p)) throw validation_error("manifest " + p.string() + " not found (pass --manifest)");
  return read_manifest(p);
}

// ---------------------------------------------------------------------------
// prepare: filter -> split -> folds -> balance

struct PrepareOptions {
  std::optional<BalanceOn> balance_on;
};

struct DatasetScan {
  std::string id;
  std::vector<ManifestRecord> kept;
  std::vector<std::string> removed;
  std::size_t total = 0;
};

inline DatasetScan scan_dataset(const RunConfig& cfg, const std::string& dataset) {
  const LabelMap lm = cfg.label_map_for(dataset);
  const fs::path dir = cfg.data_root / dataset;
  const auto images = list_pngs(dir / "images");
  std::vector<char> lesion(images.size(), 0);
  parallel_for(images.size(), cfg.jobs, [&](std::size_t i) {
    const fs::path mask = dir / "masks" / images[i].filename();
    if (!fs::exists(mask)) throw data_error("dataset '" + dataset + "': no mask for " + images[i].filename().string());
    lesion[i] = has_lesion(load_sample(images[i], mask, lm), lm);
  });
  DatasetScan scan;
  scan.id = dataset;
  scan.total = images.size();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!lesion[i]) {
      scan.removed.push_back(images[i].stem().string());
      continue;
    }
    ManifestRecord r;
    r.image_path = rel_to_root(images[i], cfg.data_root);
    r.mask_path = rel_to_root(dir / "masks" / images[i].filename(), cfg.data_root);
    r.dataset_id = dataset;
    scan.kept.push_back(std::move(r));
  }
  return scan;
}

inline int cmd_prepare(RunConfig cfg, const PrepareOptions& opt, std::ostream& out) {
  if (opt.balance_on) cfg.balance_on = *opt.balance_on;
  const auto datasets = discover_datasets(cfg);

  nlohmann::ordered_json removal;
  removal["datasets"] = nlohmann::ordered_json::array();
  std::map<std::string, std::vector<ManifestRecord>> train_sets, test_sets;
  std::map<std::string, std::size_t> kept_sizes;
  for (const auto& ds : datasets) {
    DatasetScan scan;
    try {
      scan = scan_dataset(cfg, ds);
    } catch (const Error& e) {
      throw Error(e.kind(), "dataset '" + ds + "': " + e.what());
    }
    removal["datasets"].push_back({{"dataset_id", ds},
                                   {"total", scan.total},
                                   {"kept", scan.kept.size()},
                                   {"removed", scan.removed.size()},
                                   {"removed_ids", scan.removed}});
    out << ds << ": " << scan.total << " samples, " << scan.removed.size() << " removed, " << scan.kept.size()
        << " kept\n";
    kept_sizes[ds] = scan.kept.size();

    SplitResult<ManifestRecord> split;
    FoldPlan folds;
    try {
      auto split_rng = derive_stream(cfg.seed, "split/" + ds, 0, 0);
      split = split_pareto(scan.kept, split_rng);
      auto fold_rng = derive_stream(cfg.seed, "folds/" + ds, 0, 0);
      folds = make_folds(split.train, cfg.k, fold_rng, split.test);
    } catch (const Error& e) {
      throw Error(e.kind(), "dataset '" + ds + "': " + e.what());
    }
    auto by_key = [](const ManifestRecord& a, const ManifestRecord& b) { return sample_key(a) < sample_key(b); };
    std::sort(split.train.begin(), split.train.end(), by_key);
    std::sort(split.test.begin(), split.test.end(), by_key);
    for (auto& r : split.train) {
      r.split = Split::train;
      r.fold = folds.assignments.at(sample_key(r));
    }
    for (auto& r : split.test) r.split = Split::test;
    std::vector<ManifestRecord> all = split.train;
    all.insert(all.end(), split.test.begin(), split.test.end());
    write_manifest(cfg.out / "manifests" / (ds + ".jsonl"), all);
    train_sets[ds] = std::move(split.train);
    test_sets[ds] = std::move(split.test);
  }
  write_text(cfg.out / "prepare" / "removal_report.json", removal.dump(2) + "\n");

  if (datasets.size() >= 2) {
    BalanceReport report;
    std::vector<ManifestRecord> unified;
    if (cfg.balance_on == BalanceOn::train) {
      auto [records, rep] = balance_manifest(train_sets);
      unified = std::move(records);
      report = std::move(rep);
    } else {
      report = balance_factors(kept_sizes);
      for (const auto& [ds, recs] : train_sets)
        for (const auto& r : recs)
          for (std::size_t k = 0; k < report.at(ds).factor; ++k) {
            auto copy = r;
            copy.replicate_index = static_cast<int>(k);
            unified.push_back(std::move(copy));
          }
    }
    for (const auto& [ds, recs] : test_sets) unified.insert(unified.end(), recs.begin(), recs.end());
    write_manifest(default_manifest(cfg), unified);
    auto rj = report.to_json();
    rj["balance_on"] = cfg.balance_on == BalanceOn::train ? "train" : "whole";
    write_text(cfg.out / "prepare" / "balance_report.json", rj.dump(2) + "\n");
    for (const auto& e : report.entries)
      out << "balance " << e.dataset_id << ": n=" << e.factor << " -> " << e.replicated_size << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// augment: offline expansion or an online preview of gated batches

enum class AugmentMode { offline, online_preview };

struct AugmentOptions {
  AugmentMode mode = AugmentMode::offline;
  fs::path manifest;
  fs::path plan;
  std::optional<double> probability;
  std::optional<std::size_t> batch_size;
  std::size_t batches = 4;
  std::uint64_t epoch = 0;
};

inline AugmentationPlan load_single_plan(const fs::path& path) {
  if (path.empty()) throw validation_error("no transform plan given (--plan or config 'plan')");
  auto plans = load_plans(path);
  if (plans.size() != 1) throw validation_error("transform config " + path.string() + " must hold exactly one plan");
  return plans.front();
}

inline std::vector<std::size_t> train_indices(const std::vector<ManifestRecord>& records) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].split == Split::train) out.push_back(i);
  return out;
}

inline std::string indexed_stem(const std::string& stem, const char* tag, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "__%s%06zu", tag, i);
  return stem + buf;
}

inline void augment_offline(const RunConfig& cfg, const std::vector<ManifestRecord>& records,
                            const AugmentationPlan& plan, std::size_t batch_size, const fs::path& dir,
                            std::ostream& out) {
  LabelMapCache maps(cfg);
  const auto train = train_indices(records);
  struct Job {
    std::size_t record, batch, position;
  };
  std::vector<Job> jobs;
  for (std::size_t start = 0, b = 0; start < train.size(); start += batch_size, ++b) {
    const auto n = std::min(batch_size, train.size() - start);
    const auto sel = gate_selection(plan, cfg.seed, 0, b, n);
    for (std::size_t pos = 0; pos < n; ++pos)
      if (sel[pos]) jobs.push_back({train[start + pos], b, pos});
  }
  std::vector<ManifestRecord> added(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& rec = records[job.record];
    Sample aug;
    try {
      aug = augment_item(load_record(cfg, rec, maps), plan, cfg.seed, 0, job.batch, job.position);
    } catch (const Error& e) {
      throw Error(e.kind(), "sample '" + sample_key(rec) + "': " + e.what());
    }
    const auto stem = indexed_stem(sample_key(rec), "aug", job.record);
    const fs::path img = dir / rec.dataset_id / "images" / (stem + ".png");
    const fs::path msk = dir / rec.dataset_id / "masks" / (stem + ".png");
    write_png(aug.image, img);
    write_png(maps.get(rec.dataset_id).encode(aug.mask), msk);
    ManifestRecord r = rec;
    r.image_path = rel_to_root(img, cfg.data_root);
    r.mask_path = rel_to_root(msk, cfg.data_root);
    r.replicate_index = 0;
    added[j] = std::move(r);
  });
  std::vector<ManifestRecord> expanded = records;
  expanded.insert(expanded.end(), added.begin(), added.end());
  write_manifest(dir / "manifest.jsonl", expanded);
  out << "offline p=" << fmt_prob(plan.probability) << ": " << added.size() << " augmented copies, "
      << expanded.size() << " records\n";
}

inline void augment_preview(const RunConfig& cfg, const std::vector<ManifestRecord>& records,
                            const AugmentationPlan& plan, std::size_t batch_size, std::size_t batches,
                            std::uint64_t epoch, const fs::path& dir, std::ostream& out) {
  LabelMapCache maps(cfg);
  const auto train = train_indices(records);
  CsvWriter log({"epoch", "batch", "position", "sample_id", "applied"}, cfg.seed);
  for (std::size_t b = 0; b < batches; ++b) {
    const auto start = b * batch_size;
    if (start >= train.size()) break;
    const auto n = std::min(batch_size, train.size() - start);
    Batch batch{{}, epoch, b};
    batch.samples.resize(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) { batch.samples[i] = load_record(cfg, records[train[start + i]], maps); });
    const auto sel = gate_selection(plan, cfg.seed, epoch, b, n);
    const auto result = augment_batch(batch, plan, cfg.seed, cfg.jobs);
    const fs::path bdir = dir / ("epoch" + std::to_string(epoch)) / ("batch" + std::to_string(b));
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      char name[32];
      std::snprintf(name, sizeof name, "%03zu_", i);
      const auto stem = name + result.samples[i].sample_id;
      save_sample(result.samples[i], bdir / "images" / (stem + ".png"), bdir / "masks" / (stem + ".png"));
    });
    for (std::size_t i = 0; i < n; ++i)
      log.add({std::to_string(epoch), std::to_string(b), std::to_string(i), batch.samples[i].sample_id,
               sel[i] ? "1" : "0"});
  }
  log.write(dir / "preview.csv");
  out << "online-preview: " << log.size() << " samples written under " << dir.string() << "\n";
}

inline int cmd_augment(const RunConfig& cfg, const AugmentOptions& opt, std::ostream& out) {
  const auto records = load_manifest_arg(cfg, opt.manifest);
  auto plan = load_single_plan(opt.plan.empty() ? cfg.plan : opt.plan);
  const std::size_t batch_size = opt.batch_size.value_or(cfg.batch_size);
  if (batch_size < 1) throw validation_error("batch size must be >= 1");

  if (opt.mode == AugmentMode::online_preview) {
    if (opt.probability) plan = AugmentationPlan(plan.spec, *opt.probability, plan.gate);
    augment_preview(cfg, records, plan, batch_size, opt.batches, opt.epoch, cfg.out / "augment" / "preview", out);
    return 0;
  }
  std::vector<double> probs;
  if (opt.probability) probs = {*opt.probability};
  else if (!cfg.probabilities.empty()) probs = cfg.probabilities;
  else probs = {plan.probability};
  for (double p : probs) {
    const AugmentationPlan pp(plan.spec, p, plan.gate);
    fs::path dir = cfg.out / "augment" / "offline";
    if (probs.size() > 1) dir /= "p" + fmt_prob(p);
    augment_offline(cfg, records, pp, batch_size, dir, out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// compose: lesion transplant expansion of the training records

struct ComposeOptions {
  fs::path manifest;
};

inline Mask binary_of(const Mask& canonical, const std::set<std::uint8_t>& classes) {
  Mask m(canonical.width(), canonical.height(), 0);
  auto src = canonical.pixels();
  auto dst = m.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = classes.count(src[i]) ? 1 : 0;
  return m;
}

inline int cmd_compose(const RunConfig& cfg, const ComposeOptions& opt, std::ostream& out) {
  const auto& cc = cfg.compose;
  if (cc.healthy_pool.empty()) throw validation_error("compose: no healthy pool configured");
  if (cc.lesion_dataset.empty()) throw validation_error("compose: no lesion dataset configured");
  if (!(cc.fraction > 0.0 && cc.fraction <= 1.0)) throw validation_error("compose: fraction must lie in (0, 1]");
  const auto records = load_manifest_arg(cfg, opt.manifest);
  const auto source = parse_healthy_source(cc.healthy_source);

  const auto himages = list_pngs(cc.healthy_pool / "images");
  std::vector<std::optional<HealthySample>> hslots(himages.size());
  parallel_for(himages.size(), cfg.jobs, [&](std::size_t i) {
    const fs::path lung = cc.healthy_pool / "lungmasks" / himages[i].filename();
    if (!fs::exists(lung)) throw data_error("healthy pool: no lung mask for " + himages[i].filename().string());
    hslots[i].emplace(himages[i].stem().string(), read_png<ImageTag>(himages[i]), read_png<MaskTag>(lung), source);
  });
  std::vector<HealthySample> healthy;
  for (auto& h : hslots) healthy.push_back(std::move(*h));
  if (healthy.empty()) throw validation_error("compose: healthy pool is empty");

  // Lesion pool: distinct training images of the lesion dataset.
  const LabelMap lm = cfg.label_map_for(cc.lesion_dataset);
  std::vector<const ManifestRecord*> lesion_recs;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (r.split == Split::train && r.dataset_id == cc.lesion_dataset && seen.insert(r.image_path).second)
      lesion_recs.push_back(&r);
  if (lesion_recs.empty()) throw validation_error("compose: no training records of '" + cc.lesion_dataset + "'");
  std::set<std::uint8_t> lung_classes = lm.lung_only_classes();
  lung_classes.insert(lm.lesion_classes().begin(), lm.lesion_classes().end());
  std::vector<std::optional<LesionSample>> lesions(lesion_recs.size());
  parallel_for(lesion_recs.size(), cfg.jobs, [&](std::size_t i) {
    const auto s = load_sample(resolve_record_path(cfg, lesion_recs[i]->image_path),
                               resolve_record_path(cfg, lesion_recs[i]->mask_path), lm);
    Mask lung = cc.lesion_lungmasks.empty() ? binary_of(s.mask, lung_classes)
                                            : read_png<MaskTag>(cc.lesion_lungmasks / (s.sample_id + ".png"));
    lesions[i].emplace(s.sample_id, s.image, binary_of(s.mask, lm.lesion_classes()), std::move(lung));
  });
  std::vector<LesionSample> lesion_pool;
  for (auto& l : lesions) lesion_pool.push_back(std::move(*l));

  ExpandOptions eo;
  eo.flip_lesion = cc.flip;
  eo.blend_weight = cc.blend_weight;
  eo.smooth_kernel = cc.smooth_kernel;
  eo.size_tolerance = cc.size_tolerance;
  eo.retry_budget = cc.retry_budget;
  eo.jobs = cfg.jobs;
  const auto n_train = train_indices(records).size();
  const auto count = expansion_count(n_train, cc.fraction);
  auto rng = derive_stream(cfg.seed, "compose", 0, 0);
  const auto recipes = count ? draw_recipes(count, healthy, lesion_pool, rng, eo) : std::vector<CompositeRecipe>{};
  const auto composites = compose_all(recipes, eo);

  const fs::path dir = cfg.out / "compose";
  std::vector<ManifestRecord> expanded = records;
  std::string provenance;
  std::vector<ManifestRecord> added(composites.size());
  parallel_for(composites.size(), cfg.jobs, [&](std::size_t i) {
    const auto& cs = composites[i];
    const fs::path img = dir / "images" / (cs.sample.sample_id + ".png");
    const fs::path msk = dir / "masks" / (cs.sample.sample_id + ".png");
    save_sample(cs.sample, img, msk);
    ManifestRecord r;
    r.image_path = rel_to_root(img, cfg.data_root);
    r.mask_path = rel_to_root(msk, cfg.data_root);
    r.dataset_id = "composite";
    r.split = Split::train;
    added[i] = std::move(r);
  });
  for (std::size_t i = 0; i < composites.size(); ++i) {
    auto pj = composites[i].provenance();
    nlohmann::ordered_json line;
    line["sample_id"] = composites[i].sample.sample_id;
    for (auto it = pj.begin(); it != pj.end(); ++it) line[it.key()] = it.value();
    provenance += line.dump() + "\n";
  }
  expanded.insert(expanded.end(), added.begin(), added.end());
  write_text(dir / "provenance.jsonl", provenance);
  write_manifest(dir / "manifest.jsonl", expanded);
  out << "compose: " << composites.size() << " composites from " << n_train << " training records, "
      << expanded.size() << " records\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval: per-image confusion counts of test predictions

struct EvalOptions {
  fs::path manifest;
  fs::path pred_root;
  std::string technique = "none";
  double probability = 0.0;
  int fold = 0;
};

inline fs::path eval_records_path(const RunConfig& cfg, const EvalOptions& opt) {
  return cfg.out / "eval" / ("records_" + opt.technique + "_p" + fmt_prob(opt.probability) + "_f" +
                             std::to_string(opt.fold) + ".csv");
}

inline int cmd_eval(const RunConfig& cfg, const EvalOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.pred_root.empty()) throw validation_error("eval: --pred-root is required");
  if (opt.technique.empty() || opt.technique.find_first_of(",/ ") != std::string::npos)
    throw validation_error("eval: technique name must be non-empty without ',', '/' or spaces");
  const auto records = load_manifest_arg(cfg, opt.manifest);
  std::vector<const ManifestRecord*> tests;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (r.split == Split::test && seen.insert(r.image_path).second) tests.push_back(&r);
  if (tests.empty()) throw validation_error("eval: manifest has no test records");

  std::vector<std::string> missing;
  for (const auto* r : tests) {
    const fs::path p = opt.pred_root / r->dataset_id / "masks" / (sample_key(*r) + ".png");
    if (!fs::exists(p)) missing.push_back(p.string());
  }
  if (!missing.empty()) {
    for (const auto& m : missing) err << "missing prediction: " << m << "\n";
    throw data_error(std::to_string(missing.size()) + " prediction(s) missing under " + opt.pred_root.string());
  }

  LabelMapCache maps(cfg);
  std::vector<EvalRecord> evals(tests.size());
  parallel_for(tests.size(), cfg.jobs, [&](std::size_t i) {
    const auto& r = *tests[i];
    const auto& lm = maps.get(r.dataset_id);
    const auto truth = remap_binary(load_record(cfg, r, maps), lm);
    const auto pred = read_png<MaskTag>(opt.pred_root / r.dataset_id / "masks" / (sample_key(r) + ".png"));
    ConfusionCounts c;
    try {
      c = confusion(pred, truth.mask);
    } catch (const Error& e) {
      throw Error(e.kind(), "prediction for '" + sample_key(r) + "': " + e.what());
    }
    auto e = EvalRecord::from_counts(sample_key(r), c);
    e.technique = opt.technique;
    e.probability = opt.probability;
    e.dataset = r.dataset_id;
    e.fold = opt.fold;
    evals[i] = std::move(e);
  });

  CsvWriter w({"sample_id", "dataset", "technique", "probability", "fold", "tp", "fp", "fn", "tn", "fscore", "iou"},
              cfg.seed);
  for (const auto& e : evals)
    w.add({e.sample_id, e.dataset, e.technique, fmt_prob(e.probability), std::to_string(e.fold),
           std::to_string(e.counts.tp), std::to_string(e.counts.fp), std::to_string(e.counts.fn),
           std::to_string(e.counts.tn), fmt_double(e.fscore, 17), fmt_double(e.iou, 17)});
  const auto path = eval_records_path(cfg, opt);
  w.write(path);
  for (const auto& g : aggregate(evals).per_group)
    out << g.key.dataset << ": F-score " << fmt_double(g.fscore, 6) << ", IoU " << fmt_double(g.iou, 6) << " over "
        << g.images << " images\n";
  out << "wrote " << path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// stats: significance of per-fold score differences

enum class CompareMode { augmentation, unified };

struct StatsOptions {
  fs::path scores;
  std::optional<double> alpha;
  CompareMode compare = CompareMode::augmentation;
  fs::path out_dir;  // default <out>/stats
};

struct ScoreRow {
  CellKey key;
  long long fold = 0;
  double f_base = 0, f_aug = 0;
  std::optional<double> iou_base, iou_aug;
};

inline std::vector<ScoreRow> read_scores(const fs::path& path) {
  const auto t = read_csv(path);
  if (t.rows.empty()) throw validation_error(path.string() + ": no score rows");
  const auto ct = t.column("technique"), cp = t.column("probability"), cd = t.column("dataset"),
             cf = t.column("fold"), cb = t.column("fscore_baseline"), ca = t.column("fscore_aug");
  const bool has_iou = t.has_column("iou_baseline") && t.has_column("iou_aug");
  std::vector<ScoreRow> rows;
  std::set<std::tuple<CellKey, long long>> seen;
  for (const auto& r : t.rows) {
    ScoreRow s;
    s.key = {r[ct], parse_double(r[cp], "probability"), r[cd]};
    s.fold = parse_int(r[cf], "fold");
    s.f_base = parse_double(r[cb], "fscore_baseline");
    s.f_aug = parse_double(r[ca], "fscore_aug");
    if (has_iou) {
      s.iou_base = parse_double(r[t.column("iou_baseline")], "iou_baseline");
      s.iou_aug = parse_double(r[t.column("iou_aug")], "iou_aug");
    }
    if (!seen.insert({s.key, s.fold}).second)
      throw validation_error(path.string() + ": duplicate row for " + s.key.technique + "/" + fmt_prob(s.key.probability) +
                             "/" + s.key.dataset + " fold " + std::to_string(s.fold));
    rows.push_back(std::move(s));
  }
  return rows;
}

inline int run_stats(const RunConfig& cfg, const std::vector<ScoreRow>& rows, double alpha, CompareMode mode,
                     const fs::path& dir, std::ostream& out) {
  std::map<CellKey, std::vector<const ScoreRow*>> by_key;
  for (const auto& r : rows) by_key[r.key].push_back(&r);
  std::map<CellKey, PairedScores> cells;
  struct Means {
    double f_base = 0, f_aug = 0, iou_aug = 0;
    bool has_iou = true;
    std::size_t n = 0;
  };
  std::map<CellKey, Means> means;
  for (auto& [key, rs] : by_key) {
    std::sort(rs.begin(), rs.end(), [](auto* a, auto* b) { return a->fold < b->fold; });
    auto& ps = cells[key];
    auto& m = means[key];
    for (const auto* r : rs) {
      ps.x.push_back(r->f_base);
      ps.y.push_back(r->f_aug);
      m.f_base += r->f_base;
      m.f_aug += r->f_aug;
      if (r->iou_aug) m.iou_aug += *r->iou_aug;
      else m.has_iou = false;
    }
    m.n = rs.size();
    m.f_base /= m.n;
    m.f_aug /= m.n;
    m.iou_aug /= m.n;
  }
  const auto table = significance_table(cells, alpha);

  // Best F-score / IoU per dataset column.
  std::map<std::string, double> best_f, best_iou;
  for (const auto& [key, m] : means) {
    auto [it, fresh] = best_f.emplace(key.dataset, m.f_aug);
    if (!fresh) it->second = std::max(it->second, m.f_aug);
    if (m.has_iou) {
      auto [jt, fr] = best_iou.emplace(key.dataset, m.iou_aug);
      if (!fr) jt->second = std::max(jt->second, m.iou_aug);
    }
  }

  const char* marker = mode == CompareMode::augmentation ? "*" : "_";
  CsvWriter w({"technique", "probability", "dataset", "folds", "mean_fscore_baseline", "mean_fscore_aug",
               "mean_iou_aug", "n_effective", "w_plus", "p_value", "method", "highlight", "best_fscore", "best_iou",
               "warning"},
              cfg.seed);
  std::map<std::string, std::map<std::string, std::string>> grid;  // row label -> dataset -> cell
  std::set<std::string> columns;
  std::size_t flagged = 0;
  for (const auto& cell : table) {
    const auto& m = means.at(cell.key);
    const bool bf = m.f_aug == best_f.at(cell.key.dataset);
    const bool bi = m.has_iou && best_iou.count(cell.key.dataset) && m.iou_aug == best_iou.at(cell.key.dataset);
    std::string warning = cell.warning;
    std::replace(warning.begin(), warning.end(), ',', ';');
    w.add({cell.key.technique, fmt_prob(cell.key.probability), cell.key.dataset, std::to_string(m.n),
           fmt_double(m.f_base), fmt_double(m.f_aug), m.has_iou ? fmt_double(m.iou_aug) : "",
           cell.result ? std::to_string(cell.result->n_effective) : "0",
           cell.result ? fmt_double(cell.result->w_plus) : "",
           cell.result ? fmt_double(cell.result->p_value, 12) : "",
           cell.result ? (cell.result->method == WilcoxonMethod::exact ? "exact" : "normal_approx") : "",
           cell.highlight ? "1" : "0", bf ? "1" : "0", bi ? "1" : "0", warning});
    flagged += cell.highlight;
    std::string text = fmt_double(m.f_aug, 4);
    if (cell.highlight) text += marker;
    if (bf) text += " [F]";
    if (bi) text += " [I]";
    if (!cell.warning.empty()) text += " (!)";
    grid[cell.key.technique + " p=" + fmt_prob(cell.key.probability)][cell.key.dataset] = text;
    columns.insert(cell.key.dataset);
  }
  w.write(dir / "significance.csv");

  std::string txt = "mean F-score with augmentation; " + std::string(marker) + " p < " + fmt_double(alpha) +
                    ", [F] best F-score, [I] best IoU, (!) degenerate cell\n";
  std::size_t label_w = 9;
  for (const auto& [row, _] : grid) label_w = std::max(label_w, row.size());
  auto pad = [](std::string s, std::size_t n) {
    s.resize(std::max(n, s.size()), ' ');
    return s;
  };
  txt += pad("technique", label_w);
  for (const auto& c : columns) txt += " | " + pad(c, 18);
  txt += "\n";
  for (const auto& [row, cols] : grid) {
    txt += pad(row, label_w);
    for (const auto& c : columns) {
      const auto it = cols.find(c);
      txt += " | " + pad(it == cols.end() ? "-" : it->second, 18);
    }
    txt += "\n";
  }
  write_text(dir / "significance.txt", txt);
  out << txt << flagged << " significant cell(s) of " << table.size() << "\n";
  return 0;
}

inline int cmd_stats(const RunConfig& cfg, const StatsOptions& opt, std::ostream& out) {
  if (opt.scores.empty()) throw validation_error("stats: a score CSV is required");
  const double alpha = opt.alpha.value_or(cfg.alpha);
  if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("alpha must lie in (0, 1)");
  return run_stats(cfg, read_scores(opt.scores), alpha, opt.compare,
                   opt.out_dir.empty() ? cfg.out / "stats" : opt.out_dir, out);
}

// ---------------------------------------------------------------------------
// report: aggregate eval records, pair with the baseline, test

enum class Averaging { macro, micro };

struct ReportOptions {
  fs::path eval_dir;
  Averaging average = Averaging::macro;
  std::string baseline = "none";
};

inline std::vector<EvalRecord> read_eval_records(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw validation_error("report: no eval directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("records_", 0) == 0 && e.path().extension() == ".csv")
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EvalRecord> out;
  for (const auto& f : files) {
    const auto t = read_csv(f);
    const auto ci = t.column("sample_id"), cd = t.column("dataset"), ct = t.column("technique"),
               cp = t.column("probability"), cf = t.column("fold"), ctp = t.column("tp"), cfp = t.column("fp"),
               cfn = t.column("fn"), ctn = t.column("tn");
    for (const auto& r : t.rows) {
      ConfusionCounts c{static_cast<std::uint64_t>(parse_int(r[ctp], "tp")),
                        static_cast<std::uint64_t>(parse_int(r[cfp], "fp")),
                        static_cast<std::uint64_t>(parse_int(r[cfn], "fn")),
                        static_cast<std::uint64_t>(parse_int(r[ctn], "tn"))};
      auto e = EvalRecord::from_counts(r[ci], c);
      e.dataset = r[cd];
      e.technique = r[ct];
      e.probability = parse_double(r[cp], "probability");
      e.fold = static_cast<int>(parse_int(r[cf], "fold"));
      out.push_back(std::move(e));
    }
  }
  if (out.empty()) throw validation_error("report: no eval records under " + dir.string());
  return out;
}

inline int cmd_report(const RunConfig& cfg, const ReportOptions& opt, std::ostream& out) {
  const auto records = read_eval_records(opt.eval_dir.empty() ? cfg.out / "eval" : opt.eval_dir);
  const auto table = aggregate(records);
  const fs::path dir = cfg.out / "report";
  const bool micro = opt.average == Averaging::micro;

  CsvWriter pf({"technique", "probability", "dataset", "fold", "images", "fscore", "iou", "micro_fscore", "micro_iou"},
               cfg.seed);
  for (const auto& f : table.per_fold)
    pf.add({f.key.technique, fmt_prob(f.key.probability), f.key.dataset, std::to_string(f.fold),
            std::to_string(f.images), fmt_double(f.fscore), fmt_double(f.iou), fmt_double(f.micro_fscore),
            fmt_double(f.micro_iou)});
  pf.write(dir / "per_fold.csv");
  CsvWriter pg({"technique", "probability", "dataset", "folds", "images", "fscore", "iou", "micro_fscore", "micro_iou"},
               cfg.seed);
  for (const auto& g : table.per_group)
    pg.add({g.key.technique, fmt_prob(g.key.probability), g.key.dataset, std::to_string(g.folds),
            std::to_string(g.images), fmt_double(g.fscore), fmt_double(g.iou), fmt_double(g.micro_fscore),
            fmt_double(g.micro_iou)});
  pg.write(dir / "per_group.csv");

  // Baseline fold scores, keyed by (dataset, fold).
  std::map<std::pair<std::string, int>, const FoldMean*> base;
  for (const auto& f : table.per_fold)
    if (f.key.technique == opt.baseline) base[{f.key.dataset, f.fold}] = &f;
  std::vector<ScoreRow> rows;
  CsvWriter sc({"technique", "probability", "dataset", "fold", "fscore_baseline", "fscore_aug", "iou_baseline",
                "iou_aug"},
               cfg.seed);
  for (const auto& f : table.per_fold) {
    if (f.key.technique == opt.baseline) continue;
    const auto it = base.find({f.key.dataset, f.fold});
    if (it == base.end()) continue;
    const auto& b = *it->second;
    ScoreRow r;
    r.key = {f.key.technique, f.key.probability, f.key.dataset};
    r.fold = f.fold;
    r.f_base = micro ? b.micro_fscore : b.fscore;
    r.f_aug = micro ? f.micro_fscore : f.fscore;
    r.iou_base = micro ? b.micro_iou : b.iou;
    r.iou_aug = micro ? f.micro_iou : f.iou;
    sc.add({r.key.technique, fmt_prob(r.key.probability), r.key.dataset, std::to_string(r.fold),
            fmt_double(r.f_base, 17), fmt_double(r.f_aug, 17), fmt_double(*r.iou_base, 17),
            fmt_double(*r.iou_aug, 17)});
    rows.push_back(std::move(r));
  }
  sc.write(dir / "scores.csv");
  out << table.per_group.size() << " group(s), " << table.per_fold.size() << " fold cell(s)\n";
  if (rows.empty()) {
    out << "no technique/baseline pairs; significance skipped\n";
    return 0;
  }
  return run_stats(cfg, rows, cfg.alpha, CompareMode::augmentation, dir, out);
}

}  // namespace lungaug::cli
