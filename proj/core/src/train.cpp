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

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "segadv/metrics.hpp"
#include "segadv/rng.hpp"
#include "segadv/segnet.hpp"

namespace segadv {
namespace {

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed,
                                     std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng = SplitMix64::stream(seed, epoch);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

void validate_config(const TrainConfig& config) {
  if (!(config.learning_rate >= 0.0) || !(config.momentum >= 0.0) ||
      config.batch_size == 0 || !(config.max_grad_norm >= 0.0)) {
    throw Error("train: learning_rate, momentum and max_grad_norm must be "
                ">= 0 and batch_size > 0");
  }
}

}  // namespace

double evaluate_mean_iou(const SegModel& model,
                         const std::vector<Example>& examples) {
  IouAccumulator acc(model.num_classes());
  for (const Example& ex : examples) {
    acc.add(predict_labels(model, ex.image), ex.labels);
  }
  return acc.mean();
}

std::string to_string(LrSchedule schedule) {
  return schedule == LrSchedule::kCosine ? "cosine" : "constant";
}

LrSchedule parse_lr_schedule(const std::string& text) {
  if (text == "constant") return LrSchedule::kConstant;
  if (text == "cosine") return LrSchedule::kCosine;
  throw Error("unknown learning-rate schedule '" + text +
              "' (expected constant or cosine)");
}

double epoch_learning_rate(const TrainConfig& config, std::size_t epoch) {
  if (config.schedule == LrSchedule::kConstant || config.epochs == 0) {
    return config.learning_rate;
  }
  const double t = static_cast<double>(epoch - 1) /
                   static_cast<double>(config.epochs);
  return config.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

TrainLog train(SegModel& model, const std::vector<Example>& train_set,
               const std::vector<Example>& val_set, const TrainConfig& config,
               const EpochCallback& on_epoch) {
  validate_config(config);
  if (train_set.empty()) throw Error("train: training set is empty");
  for (const Example& ex : train_set) {
    check_label_range(ex.labels, model.num_classes(), "train");
  }

  ParamMap<float> velocity;
  for (const auto& [name, tensor] : model.params()) {
    velocity.emplace(name, Tensor(tensor.shape()));
  }
  const auto momentum = static_cast<float>(config.momentum);

  TrainLog log;
  log.initial_val_mean_iou =
      val_set.empty() ? 0.0 : evaluate_mean_iou(model, val_set);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = epoch_order(train_set.size(), config.rng_seed, epoch);
    const auto lr = static_cast<float>(epoch_learning_rate(config, epoch));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + config.batch_size);
      ParamMap<float> batch_grad;
      for (std::size_t i = start; i < end; ++i) {
        const Example& ex = train_set[order[i]];
        ParamGradient<float> g =
            loss_and_param_grads(model, ex.image, ex.labels);
        if (!std::isfinite(g.loss)) {
          throw NumericalError("train: non-finite loss at epoch " +
                               std::to_string(epoch) + ", example '" + ex.id +
                               "'");
        }
        loss_sum += g.loss;
        if (batch_grad.empty()) {
          batch_grad = std::move(g.grads);
        } else {
          for (auto& [name, grad] : batch_grad) {
            const Tensor& add = g.grads.at(name);
            for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += add[k];
          }
        }
      }
      float inv_batch = 1.0f / static_cast<float>(end - start);
      if (config.max_grad_norm > 0.0) {
        double sq = 0.0;
        for (const auto& [name, grad] : batch_grad) {
          for (float g : grad.values()) sq += double(g) * g;
        }
        const double norm = std::sqrt(sq) * inv_batch;
        if (norm > config.max_grad_norm) {
          inv_batch *= static_cast<float>(config.max_grad_norm / norm);
        }
      }
      for (auto& [name, param] : model.mutable_params()) {
        Tensor& v = velocity.at(name);
        const Tensor& grad = batch_grad.at(name);
        for (std::size_t k = 0; k < param.size(); ++k) {
          v[k] = momentum * v[k] + grad[k] * inv_batch;
          param[k] -= lr * v[k];
        }
      }
    }
    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = loss_sum / static_cast<double>(train_set.size());
    record.val_mean_iou =
        val_set.empty() ? 0.0 : evaluate_mean_iou(model, val_set);
    log.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return log;
}

}  // namespace segadv
