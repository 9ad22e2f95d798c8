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

#include <iostream>

#include "commands.hpp"
#include "run_config.hpp"
#include "segadv/error.hpp"

namespace {

using namespace segadv;
using namespace segadv::cli;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const NoBackgroundClassError*>(&e)) return kExitNoBackground;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (const auto* aborted = dynamic_cast<const AttackAbortedError*>(&e)) {
    return aborted->cause() == AttackAbortedError::Cause::kNonFiniteGradient
               ? kExitNumerical
               : kExitData;
  }
  if (dynamic_cast<const Error*>(&e)) return kExitData;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) {
    return kExitData;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targeted adversarial attacks on a small segmentation network",
               "segadv"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::function<void()> run = register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    run();
  } catch (const std::exception& e) {
    std::cerr << "segadv: error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}
