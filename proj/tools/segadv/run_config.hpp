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


// JSON run configs for the CLI: a flat object whose keys are long flag names
// ("epsilon", "class-c", ...). Flags given on the command line win.

#ifndef SEGADV_TOOLS_RUN_CONFIG_HPP_
#define SEGADV_TOOLS_RUN_CONFIG_HPP_

#include <CLI11.hpp>
#include <filesystem>
#include <json.hpp>
#include <stdexcept>
#include <string>

namespace segadv::cli {

// Bad flag values or combinations; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fills options of `command` that were not given on the command line from
// the JSON object in `path`. Unknown keys raise UsageError.
void merge_config_file(CLI::App& command, const std::filesystem::path& path);

// Effective value of every option except --help and --config.
nlohmann::ordered_json effective_config(const CLI::App& command);

void write_run_config(const CLI::App& command,
                      const std::filesystem::path& path);

}  // namespace segadv::cli

#endif  // SEGADV_TOOLS_RUN_CONFIG_HPP_
