#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lungaug/cli/commands.hpp"
#include "lungaug/cli/config.hpp"

namespace lungaug::cli {

// Exit codes: 0 success, 1 validation or usage error, 2 data or I/O error.
inline int exit_code(ErrorKind k) { return k == ErrorKind::validation ? 1 : 2; }

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Deterministic augmentation and experiment preparation for CT lesion segmentation", "lungaug"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version);

  std::string config_path, data_root, out_root;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--data-root", data_root, "root holding <dataset>/images and <dataset>/masks");
  app.add_option("--out", out_root, "output directory");

  auto* prepare = app.add_subcommand("prepare", "filter, split, fold and balance datasets");
  std::string balance_on;
  std::optional<int> k;
  std::vector<std::string> datasets;
  prepare->add_option("--balance-on", balance_on, "train|whole")->check(CLI::IsMember({"train", "whole"}));
  prepare->add_option("--k", k, "cross-validation folds");
  prepare->add_option("--datasets", datasets, "dataset ids (default: all under the data root)");

  auto* augment = app.add_subcommand("augment", "offline expansion or online preview with one transform plan");
  std::string mode;
  AugmentOptions aug;
  std::string aug_manifest, aug_plan;
  std::optional<double> aug_p;
  std::optional<std::size_t> aug_bs;
  augment->add_option("--mode", mode, "offline|online-preview")
      ->required()
      ->check(CLI::IsMember({"offline", "online-preview"}));
  augment->add_option("--manifest", aug_manifest, "input manifest");
  augment->add_option("--plan", aug_plan, "transform plan JSON");
  augment->add_option("--probability", aug_p, "override the plan probability");
  augment->add_option("--batch-size", aug_bs, "samples per batch");
  augment->add_option("--batches", aug.batches, "batches to materialize in preview mode");
  augment->add_option("--epoch", aug.epoch, "epoch index for preview mode");

  auto* compose = app.add_subcommand("compose", "transplant real lesions into generated healthy lungs");
  std::string comp_manifest, healthy_pool, lesion_dataset, lesion_lungmasks, healthy_source;
  std::optional<double> fraction, blend, tol;
  std::optional<int> kernel, budget;
  bool flip = false;
  compose->add_option("--manifest", comp_manifest, "input manifest (post-balancing)");
  compose->add_option("--healthy-pool", healthy_pool, "directory with images/ and lungmasks/");
  compose->add_option("--lesion-dataset", lesion_dataset, "dataset providing lesion samples");
  compose->add_option("--lesion-lungmasks", lesion_lungmasks, "lung masks for the lesion samples");
  compose->add_option("--healthy-source", healthy_source, "starganv2|stylegan2ada|other");
  compose->add_option("--fraction", fraction, "expansion fraction of the training records");
  compose->add_flag("--flip", flip, "flip lesion samples horizontally before transplant");
  compose->add_option("--blend-weight", blend, "lesion weight of the blend");
  compose->add_option("--smooth-kernel", kernel, "odd Gaussian kernel for the border band");
  compose->add_option("--size-tolerance", tol, "lung-area tolerance");
  compose->add_option("--retry-budget", budget, "healthy redraws per composite");

  auto* eval = app.add_subcommand("eval", "score test predictions");
  EvalOptions ev;
  std::string ev_manifest, pred_root;
  eval->add_option("--manifest", ev_manifest, "manifest with test records");
  eval->add_option("--pred-root", pred_root, "<pred_root>/<dataset>/masks/<stem>.png")->required();
  eval->add_option("--technique", ev.technique, "technique label");
  eval->add_option("--probability", ev.probability, "probability label");
  eval->add_option("--fold", ev.fold, "fold label");

  auto* stats = app.add_subcommand("stats", "one-sided Wilcoxon tests over per-fold scores");
  StatsOptions st;
  std::string scores, compare;
  stats->add_option("scores", scores, "CSV technique,probability,dataset,fold,fscore_baseline,fscore_aug")->required();
  stats->add_option("--alpha", st.alpha, "significance level");
  stats->add_option("--compare", compare, "augmentation|unified")->check(CLI::IsMember({"augmentation", "unified"}));

  auto* report = app.add_subcommand("report", "aggregate eval records and test against the baseline");
  ReportOptions rep;
  std::string eval_dir, average;
  report->add_option("--eval-dir", eval_dir, "directory of records_*.csv");
  report->add_option("--average", average, "macro|micro")->check(CLI::IsMember({"macro", "micro"}));
  report->add_option("--baseline", rep.baseline, "technique label of the baseline");

  std::vector<const char*> argv{"lungaug"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!data_root.empty()) cfg.data_root = data_root;
    if (!out_root.empty()) cfg.out = out_root;
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (k) cfg.k = *k;
    if (!datasets.empty()) cfg.datasets = datasets;
    auto& cc = cfg.compose;
    if (!healthy_pool.empty()) cc.healthy_pool = healthy_pool;
    if (!lesion_dataset.empty()) cc.lesion_dataset = lesion_dataset;
    if (!lesion_lungmasks.empty()) cc.lesion_lungmasks = lesion_lungmasks;
    if (!healthy_source.empty()) cc.healthy_source = healthy_source;
    if (fraction) cc.fraction = *fraction;
    if (flip) cc.flip = true;
    if (blend) cc.blend_weight = *blend;
    if (kernel) cc.smooth_kernel = *kernel;
    if (tol) cc.size_tolerance = *tol;
    if (budget) cc.retry_budget = *budget;
    cfg.validate();

    if (*prepare) {
      PrepareOptions po;
      if (!balance_on.empty()) po.balance_on = balance_on == "whole" ? BalanceOn::whole : BalanceOn::train;
      return cmd_prepare(cfg, po, out);
    }
    if (*augment) {
      aug.mode = mode == "offline" ? AugmentMode::offline : AugmentMode::online_preview;
      aug.manifest = aug_manifest;
      aug.plan = aug_plan;
      aug.probability = aug_p;
      aug.batch_size = aug_bs;
      return cmd_augment(cfg, aug, out);
    }
    if (*compose) return cmd_compose(cfg, ComposeOptions{comp_manifest}, out);
    if (*eval) {
      ev.manifest = ev_manifest;
      ev.pred_root = pred_root;
      return cmd_eval(cfg, ev, out, err);
    }
    if (*stats) {
      st.scores = scores;
      st.compare = compare == "unified" ? CompareMode::unified : CompareMode::augmentation;
      return cmd_stats(cfg, st, out);
    }
    if (*report) {
      rep.eval_dir = eval_dir;
      rep.average = average == "micro" ? Averaging::micro : Averaging::macro;
      return cmd_report(cfg, rep, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace lungaug::cli
