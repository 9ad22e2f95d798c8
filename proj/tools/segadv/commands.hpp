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


#ifndef SEGADV_TOOLS_COMMANDS_HPP_
#define SEGADV_TOOLS_COMMANDS_HPP_

#include <CLI11.hpp>
#include <functional>

namespace segadv::cli {

// Exit codes are a scripting contract.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumerical = 4,
  kExitNoBackground = 5,
};

// Adds gen-data, train, attack, sweep and oracle-serve to `app`. The
// returned callable runs whichever subcommand was parsed.
std::function<void()> register_commands(CLI::App& app);

}  // namespace segadv::cli

#endif  // SEGADV_TOOLS_COMMANDS_HPP_
