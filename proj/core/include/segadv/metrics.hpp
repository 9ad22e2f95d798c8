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

#ifndef SEGADV_METRICS_HPP_
#define SEGADV_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segadv/tensor.hpp"

namespace segadv {

// Attack effectiveness for one image, measured against the network's
// prediction on the unperturbed image.
//   S = { i : orig[i] == c },  B = complement of S
//   fooled    = |{ i in S : adv[i] != c }| / |S|        (null when S empty)
//   preserved = |{ i in B : adv[i] == orig[i] }| / |B|  (null when B empty)
struct PairMetrics {
  std::optional<double> fooled;
  std::optional<double> preserved;
  std::size_t n_class_pixels = 0;
  std::size_t n_background_pixels = 0;
};

PairMetrics pair_metrics(const LabelMap& pred_orig, const LabelMap& pred_adv,
                         std::uint8_t class_c);

// Mean over classes present in truth or pred of |pred=k & truth=k| /
// |pred=k | truth=k|. Classes absent from both maps are skipped.
double mean_iou(const LabelMap& pred, const LabelMap& truth,
                std::size_t num_classes);

// Accumulates intersections and unions across images; mean() is the
// dataset-level mean IoU over classes seen in either input.
class IouAccumulator {
 public:
  explicit IouAccumulator(std::size_t num_classes);

  void add(const LabelMap& pred, const LabelMap& truth);
  double mean() const;
  // Per-class IoU; nullopt for classes never seen.
  std::vector<std::optional<double>> per_class() const;

 private:
  std::size_t num_classes_;
  std::vector<std::uint64_t> intersection_;
  std::vector<std::uint64_t> union_;
};

enum class MaskMode { kNone, kPosthoc, kInloop };

std::string to_string(MaskMode mode);
MaskMode parse_mask_mode(const std::string& text);

// One attacked image at one budget.
struct SweepRecord {
  std::string image_id;
  double epsilon = 0.0;
  MaskMode mask_mode = MaskMode::kNone;
  std::size_t iterations = 0;
  PairMetrics metrics;
  std::vector<double> loss_trace;
};

// Mean and population standard deviation per budget.
struct SweepRow {
  double epsilon = 0.0;
  double mean_fooled = 0.0;
  double std_fooled = 0.0;
  double mean_preserved = 0.0;
  double std_preserved = 0.0;
  std::size_t n_images = 0;
  std::size_t fooled_excluded = 0;     // records with null fooled
  std::size_t preserved_excluded = 0;  // records with null preserved
};

struct SweepReport {
  std::vector<SweepRow> rows;          // ascending epsilon
  std::vector<SweepRecord> records;    // input records, as given
};

// Groups by epsilon (exact value). Throws Error for an empty record list or
// for a budget whose fooled or preserved values are all null.
SweepReport aggregate_sweep(std::span<const SweepRecord> records);

// Sorts by (image_id, epsilon, mask_mode).
void sort_records(std::vector<SweepRecord>& records);

}  // namespace segadv

#endif  // SEGADV_METRICS_HPP_
