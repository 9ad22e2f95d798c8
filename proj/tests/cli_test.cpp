/* Copyright 2026 The segadv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


// Exit codes and file contracts of the segadv binary, on small inputs.

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <json.hpp>
#include <map>

#include "cli_runner.hpp"
#include "segadv/dataset.hpp"
#include "segadv/image_io.hpp"
#include "segadv/segnet.hpp"
#include "test_support.hpp"

namespace segadv {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::read_file;
using testing::run_cli;
using testing::TempDir;
using ::testing::HasSubstr;

constexpr int kOk = 0, kUsage = 2, kData = 3, kNoBackground = 5;

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const std::string kLinearOracle =
    std::string("--oracle 'stdio:") + SEGADV_CLI_PATH + " oracle-serve --reference-linear'";

class CliTest : public ::testing::Test {
 protected:
  TempDir dir{"cli"};
  fs::path p(const std::string& name) const { return dir.path() / name; }

  void small_dataset(const fs::path& out) {
    const auto r = run_cli("gen-data --out " + q(out) + " --seed 7 --count 10 --size 32x32");
    ASSERT_EQ(r.code, kOk) << r.output;
  }
};

TEST_F(CliTest, NoSubcommandIsUsageError) {
  EXPECT_EQ(run_cli("").code, kUsage);
  EXPECT_EQ(run_cli("frobnicate").code, kUsage);
  EXPECT_EQ(run_cli("--help").code, kOk);
  EXPECT_EQ(run_cli("attack --help").code, kOk);
}

TEST_F(CliTest, GenDataWritesScenesAndSplit) {
  const auto r = run_cli("gen-data --out " + q(p("d")) + " --seed 7 --count 10 --size 32x32");
  ASSERT_EQ(r.code, kOk) << r.output;
  const Manifest m = read_manifest(p("d") / "manifest.json");
  EXPECT_EQ(m.records.size(), 10u);
  EXPECT_EQ(m.height, 32u);
  EXPECT_EQ(std::count_if(m.records.begin(), m.records.end(),
                          [](const ManifestRecord& rec) { return rec.split == Split::kVal; }),
            2);
  for (const ManifestRecord& rec : m.records) {
    EXPECT_TRUE(fs::exists(p("d") / rec.image_path));
    EXPECT_TRUE(fs::exists(p("d") / rec.label_path));
  }
  const json cfg = json::parse(read_file(p("d") / "run_config.json"));
  EXPECT_EQ(cfg["seed"], 7);
  EXPECT_EQ(cfg["count"], 10);
  EXPECT_EQ(cfg["size"], "32x32");
}

std::map<fs::path, std::string> snapshot(const fs::path& root) {
  std::map<fs::path, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      files[fs::relative(entry.path(), root)] = read_file(entry.path());
    }
  }
  return files;
}

TEST_F(CliTest, GenDataRerunIsByteIdentical) {
  small_dataset(p("a"));
  const auto first = snapshot(p("a"));
  EXPECT_EQ(first.size(), 10u * 2u + 2u);
  // Same arguments into the same directory is allowed and changes nothing.
  small_dataset(p("a"));
  EXPECT_EQ(snapshot(p("a")), first);

  // A second directory differs only in the echoed --out.
  small_dataset(p("b"));
  auto second = snapshot(p("b"));
  second.erase("run_config.json");
  auto expected = first;
  expected.erase("run_config.json");
  EXPECT_EQ(second, expected);
}

TEST_F(CliTest, GenDataRejectsBadSizesAndSeeds) {
  EXPECT_EQ(run_cli("gen-data --out " + q(p("d")) + " --seed 7 --size 63x63").code, kUsage);
  EXPECT_EQ(run_cli("gen-data --out " + q(p("d")) + " --seed 7 --size 8x8").code, kUsage);
  EXPECT_EQ(run_cli("gen-data --out " + q(p("d")) + " --seed 7 --size big").code, kUsage);
  EXPECT_EQ(run_cli("gen-data --out " + q(p("d")) + " --count 3").code, kUsage);
  EXPECT_FALSE(fs::exists(p("d") / "manifest.json"));
}

TEST_F(CliTest, GenDataRefusesForeignNonEmptyDir) {
  fs::create_directories(p("d"));
  std::ofstream(p("d") / "notes.txt") << "keep me";
  const auto r = run_cli("gen-data --out " + q(p("d")) + " --seed 7 --count 5 --size 32x32");
  EXPECT_EQ(r.code, kUsage);
  EXPECT_THAT(r.output, HasSubstr("--force"));
  small_dataset(p("e"));
  EXPECT_EQ(run_cli("gen-data --out " + q(p("e")) + " --seed 8 --count 10 --size 32x32").code,
            kUsage);
  EXPECT_EQ(run_cli("gen-data --out " + q(p("d")) +
                    " --seed 7 --count 5 --size 32x32 --force").code,
            kOk);
}

TEST_F(CliTest, ConfigFileMergesUnderFlags) {
  std::ofstream(p("cfg.json")) << R"({"seed": 7, "count": 5, "size": "32x32", "out": "d"})";
  auto r = run_cli("gen-data --workspace " + q(dir.path()) + " --config cfg.json --count 6");
  ASSERT_EQ(r.code, kOk) << r.output;
  EXPECT_EQ(read_manifest(p("d") / "manifest.json").records.size(), 6u);
  const json cfg = json::parse(read_file(p("d") / "run_config.json"));
  EXPECT_EQ(cfg["count"], 6);
  EXPECT_EQ(cfg["seed"], 7);

  std::ofstream(p("bad.json")) << R"({"seed": 7, "colour": "red"})";
  r = run_cli("gen-data --workspace " + q(dir.path()) + " --config bad.json --out x");
  EXPECT_EQ(r.code, kUsage);
  EXPECT_THAT(r.output, HasSubstr("colour"));

  std::ofstream(p("broken.json")) << "{";
  EXPECT_NE(run_cli("gen-data --workspace " + q(dir.path()) +
                    " --config broken.json --out x --seed 1").code,
            kOk);
}

TEST_F(CliTest, TrainMissingManifestIsDataError) {
  const auto r = run_cli("train --data " + q(p("nowhere")) + " --seed 7 --out " +
                         q(p("m.sgv")));
  EXPECT_EQ(r.code, kData);
  EXPECT_THAT(r.output, HasSubstr("manifest"));
}

TEST_F(CliTest, TrainZeroEpochsWritesInitialCheckpoint) {
  small_dataset(p("d"));
  const auto r = run_cli("train --data " + q(p("d")) + " --seed 3 --epochs 0 --out " +
                         q(p("m/model.sgv")));
  ASSERT_EQ(r.code, kOk) << r.output;
  EXPECT_EQ(load_checkpoint<float>(p("m/model.sgv")), SegModel::initialize(5, 3));
  EXPECT_THAT(r.output, HasSubstr("held-out mean IoU: "));
  const double iou = std::stod(r.output.substr(r.output.find("IoU: ") + 5));
  EXPECT_LT(iou, 0.4);  // an untrained net is near chance
  EXPECT_EQ(read_file(p("m/train_log.csv")), "epoch,mean_loss,val_mean_iou\n");
  EXPECT_TRUE(fs::exists(p("m/run_config.json")));
}

TEST_F(CliTest, TrainRejectsBadHyperparameters) {
  small_dataset(p("d"));
  const std::string base = "train --data " + q(p("d")) + " --seed 3 --out " + q(p("m.sgv"));
  EXPECT_EQ(run_cli(base + " --batch-size 0").code, kUsage);
  EXPECT_EQ(run_cli(base + " --lr-schedule step").code, kUsage);
  EXPECT_EQ(run_cli("train --data " + q(p("d")) + " --out " + q(p("m.sgv"))).code, kUsage);
}

TEST_F(CliTest, AttackThroughOracleProcess) {
  small_dataset(p("d"));
  const std::string image = q(p("d/images/scene_00001.png"));
  const auto r = run_cli("attack " + kLinearOracle + " --image " + image +
                         " --class-c 0 --epsilon 0 --out " + q(p("a")));
  ASSERT_EQ(r.code, kOk) << r.output;
  EXPECT_EQ(read_image_png(p("a/adversarial.png")), read_image_png(p("a/original.png")));
  for (const char* name : {"target_labels.png", "prediction_original.png", "target.png",
                           "prediction_adversarial.png", "noise_x8.png", "diff.png",
                           "panel.png", "run_config.json"}) {
    EXPECT_TRUE(fs::exists(p("a") / name)) << name;
  }
  const json m = json::parse(read_file(p("a/metrics.json")));
  EXPECT_EQ(m["iterations"], 0);
  EXPECT_EQ(m["epsilon"], 0.0);
  if (!m["fooled"].is_null()) EXPECT_EQ(m["fooled"], 0.0);
  EXPECT_EQ(m["preserved"], 1.0);
}

TEST_F(CliTest, AllClassCImageHasItsOwnExitCode) {
  // The linear reference model labels flat mid-grey as class 0 everywhere.
  Tensor grey({3, 16, 16});
  for (float& v : grey.data()) v = 128.0f;
  write_image_png(grey, p("grey.png"));
  auto r = run_cli("attack " + kLinearOracle + " --image " + q(p("grey.png")) +
                   " --class-c 0 --out " + q(p("a")));
  EXPECT_EQ(r.code, kNoBackground) << r.output;
  r = run_cli("attack " + kLinearOracle + " --image " + q(p("grey.png")) +
              " --class-c 1 --out " + q(p("b")));
  ASSERT_EQ(r.code, kOk) << r.output;
  EXPECT_TRUE(json::parse(read_file(p("b/metrics.json")))["fooled"].is_null());
}

TEST_F(CliTest, AttackUsageErrors) {
  small_dataset(p("d"));
  const std::string image = " --image " + q(p("d/images/scene_00001.png"));
  const std::string out = " --out " + q(p("a"));
  EXPECT_EQ(run_cli("attack" + image + out).code, kUsage);  // no model
  EXPECT_EQ(run_cli("attack --model x.sgv " + kLinearOracle + image + out).code, kUsage);
  EXPECT_EQ(run_cli("attack " + kLinearOracle + image + out + " --class-c 9").code, kUsage);
  EXPECT_EQ(run_cli("attack " + kLinearOracle + image + out + " --mask sometimes").code,
            kUsage);
  EXPECT_EQ(run_cli("attack --model " + q(p("missing.sgv")) + image + out).code, kData);
  EXPECT_EQ(run_cli("attack --oracle 'tcp:127.0.0.1:1'" + image + out).code, kData);
}

TEST_F(CliTest, SweepUsageErrors) {
  small_dataset(p("d"));
  const std::string base = "sweep " + kLinearOracle + " --data " + q(p("d")) + " --out " +
                           q(p("s"));
  EXPECT_EQ(run_cli(base + " --epsilons ''").code, kUsage);
  EXPECT_EQ(run_cli(base + " --epsilons 1,-2").code, kUsage);
  EXPECT_EQ(run_cli(base + " --mask none,bogus").code, kUsage);
  EXPECT_EQ(run_cli(base + " --split test").code, kUsage);
}

TEST_F(CliTest, SweepThroughOracleProcess) {
  small_dataset(p("d"));
  const auto r = run_cli("sweep " + kLinearOracle + " --data " + q(p("d")) +
                         " --class-c 0 --epsilons 1,4 --mask none,posthoc,inloop --out " +
                         q(p("s")));
  ASSERT_EQ(r.code, kOk) << r.output;
  for (const char* mode : {"none", "posthoc", "inloop"}) {
    EXPECT_TRUE(fs::exists(p("s") / mode / "sweep.csv")) << mode;
    EXPECT_TRUE(fs::exists(p("s") / mode / "sweep.svg")) << mode;
  }
  const json summary = json::parse(read_file(p("s/summary.json")));
  EXPECT_EQ(summary["images"], 2);
  const json records = json::parse(read_file(p("s/records.json")));
  EXPECT_EQ(records.size() + 6 * summary["skipped_no_background"].get<std::size_t>(),
            2u * 2u * 3u);
  const json cfg = json::parse(read_file(p("s/run_config.json")));
  EXPECT_EQ(cfg["epsilons"], json({1, 4}));
  EXPECT_EQ(cfg["mask"], json({"none", "posthoc", "inloop"}));
  EXPECT_EQ(cfg["split"], "val");
}

TEST_F(CliTest, OracleServeNeedsExactlyOneModel) {
  EXPECT_EQ(run_cli("oracle-serve").code, kUsage);
  EXPECT_EQ(run_cli("oracle-serve --model m.sgv --reference-linear").code, kUsage);
}

}  // namespace
}  // namespace segadv
