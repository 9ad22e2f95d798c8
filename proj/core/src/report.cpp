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

#include "segadv/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace segadv {

namespace fs = std::filesystem;

std::string render_sweep_csv(const SweepReport& report) {
  std::string out = std::string(kSweepCsvHeader) + "\n";
  for (const SweepRow& r : report.rows) {
    out += fmt::format("{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.epsilon,
                       r.mean_fooled, r.std_fooled, r.mean_preserved,
                       r.std_preserved, r.n_images);
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader) {
    throw FormatError("sweep CSV header mismatch");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<std::string, 6> cells;
    std::istringstream fields(line);
    for (std::string& cell : cells) {
      if (!std::getline(fields, cell, ',')) {
        throw FormatError("sweep CSV row has fewer than 6 columns: " + line);
      }
    }
    try {
      SweepRow r;
      r.epsilon = std::stod(cells[0]);
      r.mean_fooled = std::stod(cells[1]);
      r.std_fooled = std::stod(cells[2]);
      r.mean_preserved = std::stod(cells[3]);
      r.std_preserved = std::stod(cells[4]);
      r.n_images = std::stoul(cells[5]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw FormatError("sweep CSV row is not numeric: " + line);
    }
  }
  return rows;
}

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 64, kRight = 24, kTop = 48, kBottom = 56;

struct Series {
  const char* label_prefix;
  const char* color;
  double SweepRow::*mean;
  double SweepRow::*std;
};

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_sweep_svg(const SweepReport& report,
                             const ChartOptions& options) {
  if (report.rows.empty()) throw Error("render_sweep_svg: empty report");
  const double eps_min = report.rows.front().epsilon;
  const double eps_max = report.rows.back().epsilon;
  const double span = eps_max > eps_min ? eps_max - eps_min : 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double eps) {
    return kLeft + (eps_max > eps_min ? (eps - eps_min) / span : 0.5) * plot_w;
  };
  const auto py = [&](double v) {
    return kTop + (1.0 - std::clamp(v, 0.0, 1.0)) * plot_h;
  };

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" "
      "height=\"{1:.0f}\" viewBox=\"0 0 {0:.0f} {1:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "fill=\"white\"/>\n"
      "<text x=\"{2:.2f}\" y=\"24\" text-anchor=\"middle\" "
      "font-size=\"14\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2, escape_xml(options.title));

  // Axes, gridlines and ticks.
  svg += fmt::format(
      "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
      "stroke=\"black\"/>\n"
      "<line x1=\"{0:.2f}\" y1=\"{2:.2f}\" x2=\"{3:.2f}\" y2=\"{2:.2f}\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, kTop + plot_h, kLeft + plot_w);
  for (int i = 0; i <= 4; ++i) {
    const double v = i * 0.25;
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
        "stroke=\"#dddddd\"/>\n"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.2f}</text>\n",
        kLeft, py(v), kLeft + plot_w, kLeft - 6, py(v) + 4, v);
  }
  for (const SweepRow& r : report.rows) {
    svg += fmt::format(
        "<text x=\"{0:.2f}\" y=\"{1:.2f}\" text-anchor=\"middle\">{2:g}</text>\n",
        px(r.epsilon), kTop + plot_h + 18, r.epsilon);
  }
  svg += fmt::format(
      "<text x=\"{0:.2f}\" y=\"{1:.2f}\" text-anchor=\"middle\">epsilon "
      "(0-255 pixel units)</text>\n"
      "<text x=\"16\" y=\"{2:.2f}\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 16 {2:.2f})\">fraction of pixels</text>\n",
      kLeft + plot_w / 2, kHeight - 14, kTop + plot_h / 2);

  const std::array<Series, 2> series = {{
      {"fooled", "#8b1a1a", &SweepRow::mean_fooled, &SweepRow::std_fooled},
      {"preserved", "#7f7f7f", &SweepRow::mean_preserved,
       &SweepRow::std_preserved},
  }};
  for (const Series& s : series) {
    std::string points;
    for (const SweepRow& r : report.rows) {
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.2f},{:.2f}", px(r.epsilon), py(r.*s.mean));
    }
    svg += fmt::format(
        "<polyline class=\"series-{}\" fill=\"none\" stroke=\"{}\" "
        "stroke-width=\"2\" points=\"{}\"/>\n",
        s.label_prefix, s.color, points);
    for (const SweepRow& r : report.rows) {
      const double x = px(r.epsilon);
      const double lo = py(r.*s.mean - r.*s.std);
      const double hi = py(r.*s.mean + r.*s.std);
      svg += fmt::format(
          "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
          "stroke=\"{3}\"/>\n"
          "<line x1=\"{4:.2f}\" y1=\"{1:.2f}\" x2=\"{5:.2f}\" y2=\"{1:.2f}\" "
          "stroke=\"{3}\"/>\n"
          "<line x1=\"{4:.2f}\" y1=\"{2:.2f}\" x2=\"{5:.2f}\" y2=\"{2:.2f}\" "
          "stroke=\"{3}\"/>\n"
          "<circle cx=\"{0:.2f}\" cy=\"{6:.2f}\" r=\"3\" fill=\"{3}\"/>\n",
          x, lo, hi, s.color, x - 4, x + 4, py(r.*s.mean));
    }
  }

  // Legend box in the lower right, where fooled curves rarely go.
  const std::array<std::string, 2> legend = {
      "fooled (" + options.class_label + ")", "preserved (background)"};
  const double lx = kLeft + plot_w - 182;
  const double ly = kTop + plot_h - 58;
  svg += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"174\" height=\"48\" "
      "fill=\"white\" fill-opacity=\"0.9\" stroke=\"#cccccc\"/>\n",
      lx, ly);
  for (std::size_t i = 0; i < legend.size(); ++i) {
    const double y = ly + 16 + 18.0 * static_cast<double>(i);
    const double x = lx + 8;
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
        "stroke=\"{3}\" stroke-width=\"2\"/>\n"
        "<text x=\"{4:.2f}\" y=\"{5:.2f}\">{6}</text>\n",
        x, y, x + 20, series[i].color, x + 26, y + 4, escape_xml(legend[i]));
  }
  svg += "</svg>\n";
  return svg;
}

EmittedFiles emit_report(const SweepReport& report, const fs::path& out_dir,
                         const ChartOptions& options) {
  if (report.rows.empty()) throw Error("emit_report: report has no rows");
  const std::string csv = render_sweep_csv(report);
  const std::string svg = render_sweep_svg(report, options);
  fs::create_directories(out_dir);
  EmittedFiles files{out_dir / "sweep.csv", out_dir / "sweep.svg"};
  for (const auto& [path, body] :
       {std::pair{files.csv, &csv}, std::pair{files.svg, &svg}}) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << *body;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }
  return files;
}

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 8> kLabelColors = {{
    {70, 130, 180},   // background: steel blue
    {128, 64, 128},   // road
    {190, 153, 110},  // building
    {0, 0, 142},      // car
    {220, 20, 60},    // person
    {107, 142, 35},
    {250, 170, 30},
    {0, 180, 180},
}};

}  // namespace

RgbImage colorize_labels(const LabelMap& labels) {
  RgbImage out{labels.height(), labels.width(),
               std::vector<std::uint8_t>(labels.size() * 3)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& color = kLabelColors[labels[i] % kLabelColors.size()];
    std::copy(color.begin(), color.end(), out.pixels.begin() + 3 * i);
  }
  return out;
}

RgbImage disagreement_map(const LabelMap& a, const LabelMap& b) {
  if (!a.same_extent(b.height(), b.width())) {
    throw DimensionError("disagreement_map: label maps differ in size");
  }
  RgbImage out{a.height(), a.width(), std::vector<std::uint8_t>(a.size() * 3)};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::uint8_t v = a[i] != b[i] ? 255 : 0;
    std::fill_n(out.pixels.begin() + 3 * i, 3, v);
  }
  return out;
}

RgbImage amplified_noise(const Tensor& xi, float gain) {
  Tensor shifted = xi;
  for (float& v : shifted.data()) v = 128.0f + gain * v;
  return to_rgb(shifted);
}

RgbImage panel_strip(const std::vector<RgbImage>& panels) {
  if (panels.empty()) throw DimensionError("panel_strip: no panels");
  constexpr std::size_t kGutter = 2;
  const std::size_t height = panels.front().height;
  std::size_t width = 0;
  for (const RgbImage& p : panels) {
    if (p.height != height) {
      throw DimensionError("panel_strip: panels differ in height");
    }
    width += p.width;
  }
  width += kGutter * (panels.size() - 1);
  RgbImage out{height, width, std::vector<std::uint8_t>(height * width * 3, 255)};
  std::size_t x0 = 0;
  for (const RgbImage& p : panels) {
    for (std::size_t y = 0; y < height; ++y) {
      std::copy_n(p.pixels.begin() + y * p.width * 3, p.width * 3,
                  out.pixels.begin() + (y * width + x0) * 3);
    }
    x0 += p.width + kGutter;
  }
  return out;
}

RgbImage attack_panel(const Tensor& original, const Tensor& adversarial,
                      const LabelMap& target, const LabelMap& pred_orig,
                      const LabelMap& pred_adv) {
  return panel_strip({to_rgb(original), to_rgb(adversarial),
                      colorize_labels(target), colorize_labels(pred_adv),
                      disagreement_map(pred_orig, pred_adv)});
}

}  // namespace segadv
