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


#include "commands.hpp"

#include <fmt/core.h>
#include <fmt/ostream.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <set>

#include "run_config.hpp"
#include "segadv/attack.hpp"
#include "segadv/dataset.hpp"
#include "segadv/image_io.hpp"
#include "segadv/metrics.hpp"
#include "segadv/oracle.hpp"
#include "segadv/report.hpp"
#include "segadv/scenegen.hpp"
#include "segadv/segnet.hpp"
#include "segadv/target_synth.hpp"

namespace segadv::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

fs::path resolve(const fs::path& workspace, const fs::path& p) {
  return p.is_absolute() ? p : workspace / p;
}

// Options every subcommand shares.
struct Common {
  std::string workspace = ".";
  std::string config;
};

void add_common(CLI::App& sub, Common& common) {
  sub.add_option("--workspace", common.workspace,
                 "Directory that relative paths are resolved against");
  sub.add_option("--config", common.config,
                 "JSON file with flag values (flags given here win)");
}

// Applies --config, then checks options that must end up set.
void finish_options(CLI::App& sub, const Common& common,
                    std::initializer_list<const char*> required) {
  if (!common.config.empty()) {
    merge_config_file(sub, resolve(common.workspace, common.config));
  }
  for (const char* name : required) {
    if (sub.get_option(name)->count() == 0) {
      throw UsageError(std::string(name) + " is required");
    }
  }
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  const std::size_t x = text.find('x');
  auto number = [&](std::string_view part) {
    std::size_t v = 0;
    auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || end != part.data() + part.size() || part.empty()) {
      throw UsageError("--size must look like HxW, got '" + text + "'");
    }
    return v;
  };
  if (x == std::string::npos) {
    throw UsageError("--size must look like HxW, got '" + text + "'");
  }
  const std::string_view view(text);
  return {number(view.substr(0, x)), number(view.substr(x + 1))};
}

std::uint8_t parse_class(int value, std::size_t num_classes) {
  if (value < 0 || static_cast<std::size_t>(value) >= num_classes) {
    throw UsageError(fmt::format("--class-c {} is outside [0, {})", value,
                                 num_classes));
  }
  return static_cast<std::uint8_t>(value);
}

MaskMode parse_mask(const std::string& text) {
  try {
    return parse_mask_mode(text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

// ---- model selection --------------------------------------------------------

struct ModelSource {
  std::string model;
  std::string oracle;
};

void add_model_source(CLI::App& sub, ModelSource& source) {
  sub.add_option("--model", source.model, "Checkpoint (.sgv) to attack");
  sub.add_option("--oracle", source.oracle,
                 "Remote model endpoint: tcp:HOST:PORT or stdio:COMMAND");
}

struct LoadedModel {
  std::unique_ptr<SegModel> weights;  // set for local checkpoints
  std::unique_ptr<DifferentiableModel> model;
};

LoadedModel load_model(const ModelSource& source, const fs::path& workspace) {
  if (source.model.empty() == source.oracle.empty()) {
    throw UsageError("give exactly one of --model or --oracle");
  }
  LoadedModel out;
  if (!source.model.empty()) {
    out.weights = std::make_unique<SegModel>(
        load_checkpoint<float>(resolve(workspace, source.model)));
    out.model = std::make_unique<SegNetModel>(*out.weights);
  } else {
    out.model = std::make_unique<RemoteModel>(connect_oracle(source.oracle));
  }
  return out;
}

ordered_json metrics_json(const PairMetrics& m) {
  ordered_json j;
  j["fooled"] = m.fooled ? ordered_json(*m.fooled) : ordered_json(nullptr);
  j["preserved"] =
      m.preserved ? ordered_json(*m.preserved) : ordered_json(nullptr);
  j["n_class_pixels"] = m.n_class_pixels;
  j["n_background_pixels"] = m.n_background_pixels;
  return j;
}

ordered_json record_json(const SweepRecord& r) {
  ordered_json j;
  j["image_id"] = r.image_id;
  j["epsilon"] = r.epsilon;
  j["iterations"] = r.iterations;
  j["mask_mode"] = to_string(r.mask_mode);
  const ordered_json metrics = metrics_json(r.metrics);
  for (const auto& [k, v] : metrics.items()) j[k] = v;
  j["loss_trace"] = r.loss_trace;
  return j;
}

void write_json(const ordered_json& j, const fs::path& path) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

LabelMap evaluate_prediction(const DifferentiableModel& model,
                             const Tensor& adversarial, bool quantized) {
  return model.predict(quantized ? quantize_image(adversarial) : adversarial);
}

// ---- gen-data ---------------------------------------------------------------

struct GenData {
  Common common;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t count = 250;
  std::string size = "64x64";
  bool force = false;

  void add(CLI::App& sub) {
    add_common(sub, common);
    sub.add_option("--out", out, "Output directory");
    sub.add_option("--seed", seed, "Scene RNG seed (required)");
    sub.add_option("--count", count, "Number of scenes")
        ->check(CLI::PositiveNumber);
    sub.add_option("--size", size, "Scene size HxW (multiples of 4)");
    sub.add_flag("--force", force, "Overwrite a non-empty output directory");
  }

  void run(CLI::App& sub) {
    finish_options(sub, common, {"--out", "--seed"});
    const fs::path ws = common.workspace;
    const fs::path dir = resolve(ws, out);
    SceneConfig config;
    std::tie(config.height, config.width) = parse_size(size);
    config.rng_seed = seed;
    try {
      validate(config);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (fs::exists(dir) && !fs::is_empty(dir) && !force &&
        !same_dataset(dir, config)) {
      throw UsageError("output directory '" + dir.string() +
                       "' is not empty (use --force)");
    }
    const Manifest manifest = write_dataset(config, count, dir);
    write_run_config(sub, dir / "run_config.json");
    std::size_t n_val = 0;
    for (const auto& r : manifest.records) n_val += r.split == Split::kVal;
    fmt::print("wrote {} scenes ({} train, {} val) to {}\n",
               manifest.records.size(), manifest.records.size() - n_val, n_val,
               dir.string());
  }

  // Rerunning with the same arguments is allowed without --force.
  bool same_dataset(const fs::path& dir, const SceneConfig& config) const {
    try {
      const Manifest m = read_manifest(dir / kManifestFileName);
      return m.seed == config.rng_seed && m.height == config.height &&
             m.width == config.width && m.records.size() == count;
    } catch (const Error&) {
      return false;
    }
  }
};

// ---- train ------------------------------------------------------------------

struct Train {
  Common common;
  std::string data;
  std::string out = "model.sgv";
  std::string log;
  std::string schedule = "constant";
  TrainConfig config;

  void add(CLI::App& sub) {
    add_common(sub, common);
    sub.add_option("--data", data, "Dataset directory (from gen-data)");
    sub.add_option("--out", out, "Checkpoint path");
    sub.add_option("--log", log,
                   "Per-epoch CSV log (default: train_log.csv beside --out)");
    sub.add_option("--epochs", config.epochs, "Training epochs");
    sub.add_option("--seed", config.rng_seed, "Init and shuffle seed (required)");
    sub.add_option("--lr", config.learning_rate, "SGD learning rate")
        ->check(CLI::PositiveNumber);
    sub.add_option("--momentum", config.momentum, "SGD momentum")
        ->check(CLI::Range(0.0, 0.999));
    sub.add_option("--batch-size", config.batch_size, "Mini-batch size")
        ->check(CLI::PositiveNumber);
    sub.add_option("--lr-schedule", schedule, "constant | cosine");
    sub.add_option("--clip-norm", config.max_grad_norm,
                   "Clip batch gradients to this l2 norm (0: off)")
        ->check(CLI::NonNegativeNumber);
  }

  void run(CLI::App& sub) {
    finish_options(sub, common, {"--data", "--seed"});
    try {
      config.schedule = parse_lr_schedule(schedule);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const fs::path ws = common.workspace;
    const fs::path data_dir = resolve(ws, data);
    const fs::path ckpt = resolve(ws, out);
    const fs::path log_path = log.empty() ? ckpt.parent_path() / "train_log.csv"
                                          : resolve(ws, log);
    const Manifest manifest = read_manifest(data_dir / kManifestFileName);
    const std::vector<Example> train_set = load_examples(data_dir, Split::kTrain);
    const std::vector<Example> val_set = load_examples(data_dir, Split::kVal);
    if (train_set.empty() && config.epochs > 0) {
      throw FormatError("dataset has no training examples");
    }
    if (val_set.empty()) throw FormatError("dataset has no validation examples");
    if (!ckpt.parent_path().empty()) fs::create_directories(ckpt.parent_path());

    SegModel model = SegModel::initialize(manifest.num_classes, config.rng_seed);
    fmt::print("training fcn3s ({} parameters) on {} scenes, {} held out\n",
               model.parameter_count(), train_set.size(), val_set.size());
    std::ofstream log_out(log_path);
    if (!log_out) throw IoError("cannot write '" + log_path.string() + "'");
    log_out << "epoch,mean_loss,val_mean_iou\n";
    const TrainLog result =
        segadv::train(model, train_set, val_set, config, [&](const EpochRecord& r) {
          fmt::print("epoch {:>3}  loss {:.6f}  val mIoU {:.4f}\n", r.epoch,
                     r.mean_loss, r.val_mean_iou);
          std::fflush(stdout);
          log_out << fmt::format("{},{:.6f},{:.6f}\n", r.epoch, r.mean_loss,
                                 r.val_mean_iou);
        });
    save_checkpoint(model, ckpt);
    write_run_config(sub, ckpt.parent_path() / "run_config.json");
    fmt::print("held-out mean IoU: {:.4f}\n", result.final_val_mean_iou());
    fmt::print("checkpoint: {}\n", ckpt.string());
  }
};

// ---- attack -----------------------------------------------------------------

struct Attack {
  Common common;
  ModelSource source;
  std::string image;
  int class_c = kPerson;
  double epsilon = 10.0;
  int iterations = -1;
  std::string mask = "posthoc";
  std::string out;
  bool no_clamp = false;
  bool quantized_eval = false;

  void add(CLI::App& sub) {
    add_common(sub, common);
    add_model_source(sub, source);
    sub.add_option("--image", image, "RGB PNG to attack");
    sub.add_option("--class-c", class_c, "Class to erase");
    sub.add_option("--epsilon", epsilon, "l-inf budget in 0..255 pixel units")
        ->check(CLI::NonNegativeNumber);
    sub.add_option("--iterations", iterations,
                   "Iteration count (-1: min(eps+4, 1.25 eps), rounded)");
    sub.add_option("--mask", mask, "none | posthoc | inloop");
    sub.add_option("--out", out, "Output directory");
    sub.add_flag("--no-clamp", no_clamp,
                 "Do not clamp x + xi to [0, 255] during the attack");
    sub.add_flag("--quantized-eval", quantized_eval,
                 "Measure metrics on the 8-bit quantized adversarial image");
  }

  void run(CLI::App& sub) {
    finish_options(sub, common, {"--image", "--out"});
    const fs::path ws = common.workspace;
    const fs::path out_dir = resolve(ws, out);
    AttackConfig config;
    config.epsilon = epsilon;
    config.mask_mode = parse_mask(mask);
    config.clamp_valid = !no_clamp;
    if (iterations < -1) throw UsageError("--iterations must be >= -1");
    if (iterations >= 0) config.iterations = static_cast<std::size_t>(iterations);

    const fs::path image_path = resolve(ws, image);
    const Tensor x = read_image_png(image_path);
    const LoadedModel loaded = load_model(source, ws);
    const DifferentiableModel& model = *loaded.model;
    config.class_c = parse_class(class_c, model.num_classes());

    const LabelMap pred_orig = model.predict(x);
    const LabelMap target = synthesize_target(pred_orig, config.class_c);
    const AttackResult result = run_attack(model, x, target, config);
    const LabelMap pred_adv =
        quantized_eval ? evaluate_prediction(model, result.adversarial_image, true)
                       : result.prediction;
    const PairMetrics metrics = pair_metrics(pred_orig, pred_adv, config.class_c);

    fs::create_directories(out_dir);
    write_image_png(x, out_dir / "original.png");
    write_image_png(result.adversarial_image, out_dir / "adversarial.png");
    write_labels_png(target, out_dir / "target_labels.png");
    write_rgb_png(colorize_labels(pred_orig), out_dir / "prediction_original.png");
    write_rgb_png(colorize_labels(target), out_dir / "target.png");
    write_rgb_png(colorize_labels(pred_adv), out_dir / "prediction_adversarial.png");
    write_rgb_png(amplified_noise(result.perturbation), out_dir / "noise_x8.png");
    write_rgb_png(disagreement_map(pred_orig, pred_adv), out_dir / "diff.png");
    write_rgb_png(attack_panel(x, result.adversarial_image, target, pred_orig,
                               pred_adv),
                  out_dir / "panel.png");

    SweepRecord record;
    record.image_id = image_path.stem().string();
    record.epsilon = epsilon;
    record.mask_mode = config.mask_mode;
    record.iterations = result.iterations;
    record.metrics = metrics;
    record.loss_trace = result.loss_trace;
    ordered_json j = record_json(record);
    j["class_c"] = class_c;
    j["quantized_eval"] = quantized_eval;
    write_json(j, out_dir / "metrics.json");
    write_run_config(sub, out_dir / "run_config.json");

    auto pct = [](const std::optional<double>& v) {
      return v ? fmt::format("{:.2f}%", 100.0 * *v) : std::string("n/a");
    };
    fmt::print("{}: eps {} ({} iterations, mask {}): fooled {}, preserved {}\n",
               record.image_id, epsilon, result.iterations, mask,
               pct(metrics.fooled), pct(metrics.preserved));
  }
};

// ---- sweep ------------------------------------------------------------------

struct Sweep {
  Common common;
  ModelSource source;
  std::string data;
  std::string split = "val";
  int class_c = kPerson;
  std::vector<double> epsilons{1, 2, 4, 8, 10, 16};
  std::vector<std::string> masks{"none", "posthoc"};
  std::string out;
  std::size_t limit = 0;
  bool quantized_eval = false;

  void add(CLI::App& sub) {
    add_common(sub, common);
    add_model_source(sub, source);
    sub.add_option("--data", data, "Dataset directory (from gen-data)");
    sub.add_option("--split", split, "train | val");
    sub.add_option("--class-c", class_c, "Class to erase");
    sub.add_option("--epsilons", epsilons, "Comma-separated budgets")
        ->delimiter(',');
    sub.add_option("--mask", masks, "Comma-separated mask modes")
        ->delimiter(',');
    sub.add_option("--out", out, "Output directory");
    sub.add_option("--limit", limit, "Attack only the first N images (0: all)");
    sub.add_flag("--quantized-eval", quantized_eval,
                 "Measure metrics on the 8-bit quantized adversarial image");
  }

  void run(CLI::App& sub) {
    finish_options(sub, common, {"--data", "--out"});
    // CLI11 reads an empty token as 0, so look at the raw text.
    for (const char* name : {"--epsilons", "--mask"}) {
      for (const std::string& token : sub.get_option(name)->results()) {
        if (token.empty()) {
          throw UsageError(std::string(name) + " has an empty entry");
        }
      }
    }
    if (epsilons.empty()) throw UsageError("--epsilons must not be empty");
    for (double e : epsilons) {
      if (!(e >= 0.0)) throw UsageError("--epsilons must be >= 0");
    }
    if (masks.empty()) throw UsageError("--mask must not be empty");
    std::vector<MaskMode> modes;
    for (const std::string& m : masks) {
      const MaskMode mode = parse_mask(m);
      if (std::find(modes.begin(), modes.end(), mode) == modes.end()) {
        modes.push_back(mode);
      }
    }
    Split which;
    try {
      which = parse_split(split);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const fs::path ws = common.workspace;
    const fs::path out_dir = resolve(ws, out);
    std::vector<Example> examples = load_examples(resolve(ws, data), which);
    if (limit > 0 && examples.size() > limit) examples.resize(limit);
    if (examples.empty()) throw FormatError("no images in split " + split);
    const LoadedModel loaded = load_model(source, ws);
    const DifferentiableModel& model = *loaded.model;
    const std::uint8_t c = parse_class(class_c, model.num_classes());

    auto has = [&](MaskMode m) {
      return std::find(modes.begin(), modes.end(), m) != modes.end();
    };
    std::vector<SweepRecord> records;
    std::vector<std::string> skipped;
    for (const Example& ex : examples) {
      const LabelMap pred = model.predict(ex.image);
      LabelMap target;
      try {
        target = synthesize_target(pred, c);
      } catch (const NoBackgroundClassError&) {
        skipped.push_back(ex.id);
        continue;
      }
      const Mask mask = extract_mask(pred, c);
      for (double eps : epsilons) {
        AttackConfig config;
        config.epsilon = eps;
        config.class_c = c;
        auto record = [&](MaskMode mode, const AttackResult& r,
                          const LabelMap& pred_adv) {
          records.push_back({ex.id, eps, mode, r.iterations,
                             pair_metrics(pred, pred_adv, c), r.loss_trace});
        };
        if (has(MaskMode::kNone) || has(MaskMode::kPosthoc)) {
          // The posthoc result is the unmasked perturbation restricted to
          // the mask, so one attack serves both modes.
          config.mask_mode = MaskMode::kNone;
          AttackResult full = run_attack(model, ex.image, target, config);
          if (has(MaskMode::kNone)) {
            record(MaskMode::kNone, full,
                   quantized_eval
                       ? evaluate_prediction(model, full.adversarial_image, true)
                       : full.prediction);
          }
          if (has(MaskMode::kPosthoc)) {
            const Tensor adv = apply_masked(ex.image, full.perturbation, mask,
                                            config.clamp_valid);
            record(MaskMode::kPosthoc, full,
                   evaluate_prediction(model, adv, quantized_eval));
          }
        }
        if (has(MaskMode::kInloop)) {
          config.mask_mode = MaskMode::kInloop;
          const AttackResult r = run_attack(model, ex.image, target, config, mask);
          record(MaskMode::kInloop, r,
                 quantized_eval
                     ? evaluate_prediction(model, r.adversarial_image, true)
                     : r.prediction);
        }
      }
      fmt::print("attacked {}\n", ex.id);
      std::fflush(stdout);
    }
    if (records.empty()) {
      throw NoBackgroundClassError("every image was skipped: class " +
                                   std::to_string(class_c) +
                                   " covers the whole prediction");
    }
    sort_records(records);

    fs::create_directories(out_dir);
    ordered_json all = ordered_json::array();
    for (const SweepRecord& r : records) all.push_back(record_json(r));
    write_json(all, out_dir / "records.json");

    ordered_json summary;
    summary["images"] = examples.size();
    summary["skipped_no_background"] = skipped.size();
    summary["skipped_ids"] = skipped;
    summary["modes"] = ordered_json::object();
    ChartOptions chart;
    chart.class_label = scene_class_name(c);
    for (MaskMode mode : modes) {
      std::vector<SweepRecord> subset;
      for (const SweepRecord& r : records) {
        if (r.mask_mode == mode) subset.push_back(r);
      }
      const SweepReport report = aggregate_sweep(subset);
      chart.title = "Attack effectiveness vs. epsilon (mask: " +
                    to_string(mode) + ")";
      emit_report(report, out_dir / to_string(mode), chart);
      ordered_json rows = ordered_json::array();
      fmt::print("mask {}:\n  {:>8} {:>14} {:>14} {:>4}\n", to_string(mode),
                 "epsilon", "fooled", "preserved", "n");
      for (const SweepRow& row : report.rows) {
        fmt::print("  {:>8} {:>6.2f}% ±{:>5.2f} {:>6.2f}% ±{:>5.2f} {:>4}\n",
                   row.epsilon, 100 * row.mean_fooled, 100 * row.std_fooled,
                   100 * row.mean_preserved, 100 * row.std_preserved,
                   row.n_images);
        rows.push_back({{"epsilon", row.epsilon},
                        {"fooled_excluded", row.fooled_excluded},
                        {"preserved_excluded", row.preserved_excluded}});
      }
      summary["modes"][to_string(mode)] = rows;
    }
    write_json(summary, out_dir / "summary.json");
    write_run_config(sub, out_dir / "run_config.json");
    if (!skipped.empty()) {
      fmt::print("skipped {} image(s) with no background class\n",
                 skipped.size());
    }
  }
};

// ---- oracle-serve -----------------------------------------------------------

struct OracleServe {
  Common common;
  std::string model;
  bool reference_linear = false;
  int port = -1;

  void add(CLI::App& sub) {
    add_common(sub, common);
    sub.add_option("--model", model, "Checkpoint to serve");
    sub.add_flag("--reference-linear", reference_linear,
                 "Serve the built-in per-pixel linear reference model");
    sub.add_option("--port", port,
                   "Listen on 127.0.0.1:PORT (0: any); default is stdin/stdout")
        ->check(CLI::Range(0, 65535));
  }

  void run(CLI::App& sub) {
    finish_options(sub, common, {});
    if (model.empty() == !reference_linear) {
      throw UsageError("give exactly one of --model or --reference-linear");
    }
    std::unique_ptr<SegModel> weights;
    std::unique_ptr<DifferentiableModel> served;
    if (reference_linear) {
      served = std::make_unique<LinearReferenceModel>();
    } else {
      weights = std::make_unique<SegModel>(
          load_checkpoint<float>(resolve(common.workspace, model)));
      served = std::make_unique<SegNetModel>(*weights);
    }
    const OracleResponder responder(*served);
    if (port < 0) {
      responder.serve(std::cin, std::cout);
      return;
    }
    serve_tcp(responder, static_cast<std::uint16_t>(port), 0,
              [](std::uint16_t bound) {
                fmt::print(stderr, "listening on 127.0.0.1:{}\n", bound);
              });
  }
};

}  // namespace

std::function<void()> register_commands(CLI::App& app) {
  auto gen = std::make_shared<GenData>();
  auto tr = std::make_shared<Train>();
  auto at = std::make_shared<Attack>();
  auto sw = std::make_shared<Sweep>();
  auto os = std::make_shared<OracleServe>();
  CLI::App* gen_sub = app.add_subcommand("gen-data", "Generate synthetic scenes");
  CLI::App* tr_sub = app.add_subcommand("train", "Train the segmentation network");
  CLI::App* at_sub = app.add_subcommand("attack", "Attack one image");
  CLI::App* sw_sub = app.add_subcommand("sweep", "Attack a split over several budgets");
  CLI::App* os_sub = app.add_subcommand(
      "oracle-serve", "Answer sgv-oracle/1 requests for a model");
  gen->add(*gen_sub);
  tr->add(*tr_sub);
  at->add(*at_sub);
  sw->add(*sw_sub);
  os->add(*os_sub);
  return [=]() {
    if (gen_sub->parsed()) gen->run(*gen_sub);
    else if (tr_sub->parsed()) tr->run(*tr_sub);
    else if (at_sub->parsed()) at->run(*at_sub);
    else if (sw_sub->parsed()) sw->run(*sw_sub);
    else if (os_sub->parsed()) os->run(*os_sub);
  };
}

}  // namespace segadv::cli
