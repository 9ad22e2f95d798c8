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


// Checks that need the network trained by the fixture.train ctest step
// (seed 7, default hyperparameters, 250 scenes).

#include <gtest/gtest.h>

#include <json.hpp>

#include "cli_runner.hpp"
#include "segadv/attack.hpp"
#include "segadv/dataset.hpp"
#include "segadv/image_io.hpp"
#include "segadv/metrics.hpp"
#include "segadv/report.hpp"
#include "segadv/scenegen.hpp"
#include "segadv/target_synth.hpp"
#include "test_support.hpp"

namespace segadv {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::read_file;
using testing::run_cli;

const fs::path kCache = SEGADV_TEST_CACHE;
const fs::path kData = kCache / "data";
const fs::path kModel = kCache / "model" / "model.sgv";

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

class TrainedModelTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    if (fs::exists(kModel)) net_ = new SegModel(load_checkpoint<float>(kModel));
  }
  void SetUp() override {
    ASSERT_NE(net_, nullptr) << kModel << " missing; run the fixture.train ctest step";
  }
  static void TearDownTestSuite() {
    delete net_;
    net_ = nullptr;
  }
  static SegModel* net_;
};

SegModel* TrainedModelTest::net_ = nullptr;

TEST_F(TrainedModelTest, LossFallsOverFirstThreeEpochs) {
  std::istringstream log(read_file(kCache / "model" / "train_log.csv"));
  std::string line;
  std::getline(log, line);
  ASSERT_EQ(line, "epoch,mean_loss,val_mean_iou");
  std::vector<double> losses;
  while (std::getline(log, line)) {
    losses.push_back(std::stod(line.substr(line.find(',') + 1)));
  }
  ASSERT_GE(losses.size(), 3u);
  EXPECT_LT(losses[1], losses[0]);
  EXPECT_LT(losses[2], losses[1]);
}

TEST_F(TrainedModelTest, HeldOutIouGate) {
  const double iou = evaluate_mean_iou(*net_, load_examples(kData, Split::kVal));
  EXPECT_GE(iou, 0.80);
}

TEST_F(TrainedModelTest, ConfidentTargetHasSmallGradient) {
  const Tensor image = read_image_png(kData / "images" / "scene_00003.png");
  const SegNetModel model(*net_);
  const LabelMap pred = model.predict(image);
  auto linf = [](const Tensor& t) {
    float m = 0.0f;
    for (float v : t.values()) m = std::max(m, std::abs(v));
    return m;
  };
  const float own = linf(model.loss_and_input_grad(image, pred).grad);
  const float erase = linf(
      model.loss_and_input_grad(image, synthesize_target(pred, kPerson)).grad);
  EXPECT_LT(own, 0.5f * erase);
}

TEST_F(TrainedModelTest, SceneThreeAtEpsilonTen) {
  const Tensor image = read_image_png(kData / "images" / "scene_00003.png");
  EXPECT_EQ(image, generate(SceneConfig{}, 3).image);
  const SegNetModel model(*net_);
  const LabelMap pred = model.predict(image);
  AttackConfig config;
  config.epsilon = 10;
  config.mask_mode = MaskMode::kNone;
  const AttackResult r = run_attack(model, image, synthesize_target(pred, kPerson), config);
  EXPECT_EQ(r.iterations, 13u);
  const PairMetrics m = pair_metrics(pred, r.prediction, kPerson);
  ASSERT_TRUE(m.fooled && m.preserved);
  EXPECT_GE(*m.fooled, 0.85);
  EXPECT_GE(*m.preserved, 0.95);
}

TEST_F(TrainedModelTest, CliAttackEpsilonZeroAndTen) {
  testing::TempDir dir("attack");
  const std::string base = "attack --model " + q(kModel) + " --image " +
                           q(kData / "images" / "scene_00003.png") + " --mask none";
  auto r = run_cli(base + " --epsilon 0 --out " + q(dir.path() / "e0"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(read_file(dir.path() / "e0" / "adversarial.png"),
            read_file(dir.path() / "e0" / "original.png"));
  EXPECT_EQ(json::parse(read_file(dir.path() / "e0" / "metrics.json"))["fooled"], 0.0);

  r = run_cli(base + " --epsilon 10 --out " + q(dir.path() / "e10"));
  ASSERT_EQ(r.code, 0) << r.output;
  const json m = json::parse(read_file(dir.path() / "e10" / "metrics.json"));
  EXPECT_GE(m["fooled"].get<double>(), 0.85);
  EXPECT_EQ(m["iterations"], 13);
  EXPECT_EQ(m["loss_trace"].size(), 13u);
}

TEST_F(TrainedModelTest, CliPosthocLeavesOutsideMaskBytesAlone) {
  testing::TempDir dir("attack");
  const fs::path image_path = kData / "images" / "scene_00005.png";
  const auto r = run_cli("attack --model " + q(kModel) + " --image " + q(image_path) +
                         " --epsilon 16 --mask posthoc --out " + q(dir.path()));
  ASSERT_EQ(r.code, 0) << r.output;
  const Tensor original = read_image_png(image_path);
  const Tensor adversarial = read_image_png(dir.path() / "adversarial.png");
  const Mask mask = extract_mask(SegNetModel(*net_).predict(original), kPerson);
  std::size_t changed_inside = 0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    if (mask[i % mask.size()]) {
      changed_inside += adversarial[i] != original[i];
    } else {
      ASSERT_EQ(adversarial[i], original[i]) << "element " << i;
    }
  }
  EXPECT_GT(changed_inside, 0u);
}

TEST_F(TrainedModelTest, CliSweepSmall) {
  testing::TempDir dir("sweep");
  const auto r = run_cli("sweep --model " + q(kModel) + " --data " + q(kData) +
                         " --limit 3 --epsilons 1,10 --mask none,posthoc,inloop --out " +
                         q(dir.path()));
  ASSERT_EQ(r.code, 0) << r.output;
  const json records = json::parse(read_file(dir.path() / "records.json"));
  EXPECT_EQ(records.size(), 3u * 2u * 3u);
  for (const char* mode : {"none", "posthoc", "inloop"}) {
    const auto rows = parse_sweep_csv(read_file(dir.path() / mode / "sweep.csv"));
    ASSERT_EQ(rows.size(), 2u) << mode;
    EXPECT_EQ(rows[0].n_images, 3u);
    EXPECT_GT(rows[1].mean_fooled, rows[0].mean_fooled) << mode;
  }
}

}  // namespace
}  // namespace segadv
