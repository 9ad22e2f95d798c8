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

#ifndef SEGADV_REPORT_HPP_
#define SEGADV_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "segadv/image_io.hpp"
#include "segadv/metrics.hpp"
#include "segadv/tensor.hpp"

namespace segadv {

inline constexpr const char* kSweepCsvHeader =
    "epsilon,mean_fooled,std_fooled,mean_preserved,std_preserved,n_images";

// CSV with kSweepCsvHeader; every real printed with 6 decimals.
std::string render_sweep_csv(const SweepReport& report);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

struct ChartOptions {
  std::string title = "Attack effectiveness vs. epsilon";
  std::string class_label = "class c";
};

// Standalone SVG line chart: x = epsilon, one polyline per series with
// +/- 1 std error bars, legend "fooled (<class_label>)" and
// "preserved (background)".
std::string render_sweep_svg(const SweepReport& report,
                             const ChartOptions& options = {});

struct EmittedFiles {
  std::filesystem::path csv;
  std::filesystem::path svg;
};

// Writes sweep.csv and sweep.svg into out_dir (created if needed). Throws
// Error before touching the filesystem when the report has no rows.
EmittedFiles emit_report(const SweepReport& report,
                         const std::filesystem::path& out_dir,
                         const ChartOptions& options = {});

// Fixed color per class index for visualizations.
RgbImage colorize_labels(const LabelMap& labels);

// White where the two maps disagree, black elsewhere.
RgbImage disagreement_map(const LabelMap& a, const LabelMap& b);

// clamp(128 + gain * xi, 0, 255).
RgbImage amplified_noise(const Tensor& xi, float gain = 8.0f);

// Panels placed left to right with a 2-pixel white gutter; all panels must
// share the same height.
RgbImage panel_strip(const std::vector<RgbImage>& panels);

// original | adversarial | target | prediction on adversarial | diff
RgbImage attack_panel(const Tensor& original, const Tensor& adversarial,
                      const LabelMap& target, const LabelMap& pred_orig,
                      const LabelMap& pred_adv);

}  // namespace segadv

#endif  // SEGADV_REPORT_HPP_
