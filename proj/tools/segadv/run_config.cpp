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


#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "segadv/error.hpp"

namespace segadv::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool skipped(const CLI::Option* opt) {
  const std::string name = opt->get_single_name();
  return name == "help" || name == "config";
}

std::string scalar_text(const json& value, const std::string& key) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_number()) return value.dump();
  throw UsageError("config key '" + key + "' must be a scalar or a list");
}

// Numbers and booleans come back typed so the echo reads naturally.
ordered_json typed(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  if (!text.empty()) {
    long long i = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
    if (ec == std::errc() && end == text.data() + text.size()) return i;
    double d = 0;
    auto [dend, dec] =
        std::from_chars(text.data(), text.data() + text.size(), d);
    if (dec == std::errc() && dend == text.data() + text.size()) return d;
  }
  return text;
}

}  // namespace

void merge_config_file(CLI::App& command, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path.string() + "': " + e.what());
  }
  if (!doc.is_object()) {
    throw UsageError("config file '" + path.string() + "' must hold an object");
  }
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* opt = command.get_option_no_throw("--" + key);
    if (opt == nullptr || skipped(opt)) {
      throw UsageError("unknown config key '" + key + "' for " +
                       command.get_name());
    }
    if (opt->count() > 0) continue;
    if (value.is_null()) continue;
    if (value.is_array()) {
      std::vector<std::string> parts;
      for (const json& v : value) parts.push_back(scalar_text(v, key));
      opt->add_result(parts);
    } else {
      opt->add_result(scalar_text(value, key));
    }
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

ordered_json effective_config(const CLI::App& command) {
  ordered_json out = ordered_json::object();
  for (const CLI::Option* opt : command.get_options()) {
    if (skipped(opt)) continue;
    const std::string name = opt->get_single_name();
    if (opt->get_expected_min() == 0) {
      out[name] = opt->count() > 0 && opt->as<bool>();
      continue;
    }
    if (opt->count() == 0) {
      std::string def = opt->get_default_str();
      if (opt->get_expected_max() > 1) {
        // Vector defaults render as "[a,b]".
        if (def.size() >= 2 && def.front() == '[' && def.back() == ']') {
          def = def.substr(1, def.size() - 2);
        }
        ordered_json list = ordered_json::array();
        std::istringstream parts(def);
        for (std::string part; std::getline(parts, part, ',');) {
          list.push_back(typed(part));
        }
        out[name] = list;
      } else {
        out[name] = def.empty() ? ordered_json(nullptr) : typed(def);
      }
      continue;
    }
    const std::vector<std::string>& results = opt->results();
    if (opt->get_expected_max() > 1) {
      ordered_json list = ordered_json::array();
      for (const std::string& r : results) list.push_back(typed(r));
      out[name] = list;
    } else {
      out[name] = typed(results.back());
    }
  }
  return out;
}

void write_run_config(const CLI::App& command,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  out << effective_config(command).dump(2) << '\n';
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace segadv::cli
