#include <gtest/gtest.h>

#include "lungaug/cli/csv.hpp"
#include "support/pipeline.hpp"

using namespace lungaug;
using namespace lungaug::testing;

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"augment"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"prepare", "--k", "1", "--data-root", fresh_dir("cli_k").string()}).code, 1);
  EXPECT_EQ(run_cli({"prepare", "--balance-on", "sometimes"}).code, 1);
}

TEST(Cli, MissingConfigIsIoError) {
  EXPECT_EQ(run_cli({"--config", "/nonexistent/run.json", "prepare"}).code, 2);
}

TEST(Cli, StatsEmptyCsvIsUsageError) {
  const auto dir = fresh_dir("cli_stats_empty");
  write_text_file(dir / "scores.csv", "technique,probability,dataset,fold,fscore_baseline,fscore_aug\n");
  EXPECT_EQ(run_cli({"stats", (dir / "scores.csv").string(), "--out", dir.string()}).code, 1);
}

TEST(Cli, StatsFlagsSignificantCell) {
  const auto dir = fresh_dir("cli_stats");
  std::string csv = "technique,probability,dataset,fold,fscore_baseline,fscore_aug\n";
  for (int f = 0; f < 5; ++f) {
    csv += "Rotate,0.10,MedSeg," + std::to_string(f) + ",0.5," + std::to_string(0.5 + 0.01 * (f + 1)) + "\n";
    csv += "Flip,0.20,MedSeg," + std::to_string(f) + ",0.5," + std::to_string(0.5 - 0.01 * (f + 1)) + "\n";
  }
  write_text_file(dir / "scores.csv", csv);
  const auto r = run_cli({"stats", (dir / "scores.csv").string(), "--out", dir.string(), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = cli::read_csv(dir / "stats" / "significance.csv");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][t.column("technique")], "Flip");
  EXPECT_EQ(t.rows[0][t.column("highlight")], "0");
  EXPECT_EQ(t.rows[1][t.column("technique")], "Rotate");
  EXPECT_EQ(t.rows[1][t.column("highlight")], "1");
  EXPECT_EQ(t.rows[1][t.column("p_value")], "0.03125");
  std::ifstream in(dir / "stats" / "significance.csv");
  std::string line, last;
  while (std::getline(in, line)) last = line;
  EXPECT_EQ(last, "# lungaug " + std::string(cli::tool_version) + " seed=3");
}

TEST(Cli, EvalSpotValuesAndMissingPredictions) {
  const auto dir = fresh_dir("cli_eval");
  write_text_file(dir / "data" / "d" / "label_map.json",
                  R"({"dataset_id": "d", "raw_to_class": {"0": 0, "255": 1}, "lesion_classes": [1], "lung_only_classes": []})");
  Mask truth(2, 2, 0);
  truth(0, 0) = 255;
  truth(1, 0) = 255;
  write_png(Image(2, 2), dir / "data" / "d" / "images" / "x.png");
  write_png(truth, dir / "data" / "d" / "masks" / "x.png");
  write_text_file(dir / "m.jsonl",
                  R"({"image_path":"d/images/x.png","mask_path":"d/masks/x.png","dataset_id":"d","split":"test","fold":null,"replicate_index":0})"
                  "\n");
  const std::vector<std::string> base = {"--data-root", (dir / "data").string(), "--out", (dir / "out").string()};
  auto args = [&](std::vector<std::string> a) {
    a.insert(a.end(), base.begin(), base.end());
    return a;
  };
  auto missing = run_cli(args({"eval", "--manifest", (dir / "m.jsonl").string(), "--pred-root", (dir / "p").string()}));
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("missing prediction"), std::string::npos);

  Mask pred(2, 2, 0);
  pred(0, 0) = 1;
  pred(0, 1) = 1;  // tp=1, fp=1, fn=1
  write_png(pred, dir / "p" / "d" / "masks" / "x.png");
  const auto ok = run_cli(args({"eval", "--manifest", (dir / "m.jsonl").string(), "--pred-root", (dir / "p").string()}));
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto t = cli::read_csv(dir / "out" / "eval" / "records_none_p0.00_f0.csv");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(cli::parse_double(t.rows[0][t.column("fscore")], "f"), 0.5);
  EXPECT_NEAR(cli::parse_double(t.rows[0][t.column("iou")], "i"), 1.0 / 3.0, 1e-15);

  write_png(Mask(2, 2, 7), dir / "p" / "d" / "masks" / "x.png");
  EXPECT_EQ(run_cli(args({"eval", "--manifest", (dir / "m.jsonl").string(), "--pred-root", (dir / "p").string()})).code, 1);
}

TEST(Cli, PrepareReportsRemovalsAndBalance) {
  const auto dir = fresh_dir("cli_prepare");
  write_fixture(dir / "data", {{"a", 20, 4}, {"b", 10, 0}}, 3);
  const auto r = run_cli({"prepare", "--data-root", (dir / "data").string(), "--out", (dir / "out").string(), "--k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto removal = nlohmann::json::parse(std::ifstream(dir / "out" / "prepare" / "removal_report.json"));
  EXPECT_EQ(removal["datasets"][0]["removed"], 5);
  EXPECT_EQ(removal["datasets"][1]["removed"], 0);
  const auto bal = nlohmann::json::parse(std::ifstream(dir / "out" / "prepare" / "balance_report.json"));
  EXPECT_EQ(bal["largest"], "a");
  EXPECT_EQ(bal["datasets"][1]["factor"], 2);  // 12 train vs 8 train
  EXPECT_EQ(bal["balance_on"], "train");
  const auto recs = read_manifest(dir / "out" / "manifests" / "unified.jsonl");
  std::size_t train = 0;
  for (const auto& rec : recs) train += rec.split == Split::train;
  EXPECT_EQ(train, 12u + 2u * 8u);
}

TEST(Cli, FullPipelineIdempotent) {
  const auto root = make_pipeline_root("cli_pipeline");
  const auto first = run_pipeline(root, 2);
  ASSERT_EQ(first.code, 0) << first.err;
  for (const auto* f : {"manifests/unified.jsonl", "augment/offline/manifest.jsonl", "augment/preview/preview.csv",
                        "compose/provenance.jsonl", "compose/manifest.jsonl", "report/per_group.csv",
                        "report/significance.csv", "report/significance.txt"})
    EXPECT_TRUE(fs::exists(root.out / f)) << f;
  // 60 samples, 11 lesion-free: 25 and 24 kept, 20 train each after the
  // split, so compose adds floor(0.2 * 40).
  const auto comp = read_manifest(root.out / "compose" / "manifest.jsonl");
  std::size_t composites = 0;
  for (const auto& r : comp) composites += r.dataset_id == "composite";
  EXPECT_EQ(composites, 8u);
  const auto h1 = tree_hash(root.out);
  fs::remove_all(root.out);
  ASSERT_EQ(run_pipeline(root, 2).code, 0);
  EXPECT_EQ(tree_hash(root.out), h1);
}
