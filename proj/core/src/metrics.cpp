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

#include "segadv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace segadv {
namespace {

void require_same_extent(const LabelMap& a, const LabelMap& b,
                         const char* op) {
  if (!a.same_extent(b.height(), b.width())) {
    throw DimensionError(std::string(op) + ": label maps differ in size (" +
                         std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " vs " +
                         std::to_string(b.height()) + "x" +
                         std::to_string(b.width()) + ")");
  }
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd population_stats(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

}  // namespace

PairMetrics pair_metrics(const LabelMap& pred_orig, const LabelMap& pred_adv,
                         std::uint8_t class_c) {
  require_same_extent(pred_orig, pred_adv, "pair_metrics");
  std::size_t fooled = 0, preserved = 0;
  PairMetrics m;
  for (std::size_t i = 0; i < pred_orig.size(); ++i) {
    if (pred_orig[i] == class_c) {
      ++m.n_class_pixels;
      if (pred_adv[i] != class_c) ++fooled;
    } else {
      ++m.n_background_pixels;
      if (pred_adv[i] == pred_orig[i]) ++preserved;
    }
  }
  if (m.n_class_pixels > 0) {
    m.fooled = static_cast<double>(fooled) /
               static_cast<double>(m.n_class_pixels);
  }
  if (m.n_background_pixels > 0) {
    m.preserved = static_cast<double>(preserved) /
                  static_cast<double>(m.n_background_pixels);
  }
  return m;
}

IouAccumulator::IouAccumulator(std::size_t num_classes)
    : num_classes_(num_classes),
      intersection_(num_classes, 0),
      union_(num_classes, 0) {}

void IouAccumulator::add(const LabelMap& pred, const LabelMap& truth) {
  require_same_extent(pred, truth, "mean_iou");
  check_label_range(pred, num_classes_, "mean_iou (pred)");
  check_label_range(truth, num_classes_, "mean_iou (truth)");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::uint8_t p = pred[i];
    const std::uint8_t t = truth[i];
    if (p == t) {
      ++intersection_[p];
      ++union_[p];
    } else {
      ++union_[p];
      ++union_[t];
    }
  }
}

std::vector<std::optional<double>> IouAccumulator::per_class() const {
  std::vector<std::optional<double>> out(num_classes_);
  for (std::size_t k = 0; k < num_classes_; ++k) {
    if (union_[k] > 0) {
      out[k] = static_cast<double>(intersection_[k]) /
               static_cast<double>(union_[k]);
    }
  }
  return out;
}

double IouAccumulator::mean() const {
  double sum = 0.0;
  std::size_t present = 0;
  for (const auto& iou : per_class()) {
    if (iou) {
      sum += *iou;
      ++present;
    }
  }
  return present == 0 ? 0.0 : sum / static_cast<double>(present);
}

double mean_iou(const LabelMap& pred, const LabelMap& truth,
                std::size_t num_classes) {
  IouAccumulator acc(num_classes);
  acc.add(pred, truth);
  return acc.mean();
}

std::string to_string(MaskMode mode) {
  switch (mode) {
    case MaskMode::kNone:
      return "none";
    case MaskMode::kPosthoc:
      return "posthoc";
    case MaskMode::kInloop:
      return "inloop";
  }
  return "none";
}

MaskMode parse_mask_mode(const std::string& text) {
  if (text == "none") return MaskMode::kNone;
  if (text == "posthoc") return MaskMode::kPosthoc;
  if (text == "inloop") return MaskMode::kInloop;
  throw Error("unknown mask mode '" + text +
              "' (expected none, posthoc or inloop)");
}

SweepReport aggregate_sweep(std::span<const SweepRecord> records) {
  if (records.empty()) throw Error("aggregate_sweep: no records");
  std::map<double, std::vector<const SweepRecord*>> groups;
  for (const SweepRecord& r : records) groups[r.epsilon].push_back(&r);

  SweepReport report;
  report.records.assign(records.begin(), records.end());
  for (const auto& [epsilon, group] : groups) {
    std::vector<double> fooled, preserved;
    SweepRow row;
    row.epsilon = epsilon;
    row.n_images = group.size();
    for (const SweepRecord* r : group) {
      if (r->metrics.fooled) {
        fooled.push_back(*r->metrics.fooled);
      } else {
        ++row.fooled_excluded;
      }
      if (r->metrics.preserved) {
        preserved.push_back(*r->metrics.preserved);
      } else {
        ++row.preserved_excluded;
      }
    }
    if (fooled.empty() || preserved.empty()) {
      throw Error("aggregate_sweep: no defined " +
                  std::string(fooled.empty() ? "fooled" : "preserved") +
                  " value for epsilon " + std::to_string(epsilon));
    }
    const MeanStd f = population_stats(fooled);
    const MeanStd p = population_stats(preserved);
    row.mean_fooled = f.mean;
    row.std_fooled = f.std;
    row.mean_preserved = p.mean;
    row.std_preserved = p.std;
    report.rows.push_back(row);
  }
  return report;
}

void sort_records(std::vector<SweepRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const SweepRecord& a, const SweepRecord& b) {
                     return std::tie(a.image_id, a.epsilon, a.mask_mode) <
                            std::tie(b.image_id, b.epsilon, b.mask_mode);
                   });
}

}  // namespace segadv
