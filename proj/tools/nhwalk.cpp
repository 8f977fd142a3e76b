// Copyright 2026 The nhwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// nhwalk run --config <path> --out <dir> [--workers N]
//
// NHWALK_WORKERS sets the worker count when --workers is not given.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nhwalk/experiment.hpp"
#include "nhwalk/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exit-time experiments for non-homogeneous random walks in planar wedges"};
  app.set_version_flag("--version", std::string(nhwalk::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", config, "Config file (JSON); a previous manifest.json also works")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--workers", workers, "Worker threads (default: NHWALK_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(nhwalk::ExitStatus::config_error);
  }

  if (workers == 0) {
    if (const char* env = std::getenv("NHWALK_WORKERS")) {
      try {
        const long v = std::stol(env);
        if (v < 1) throw std::out_of_range("NHWALK_WORKERS");
        workers = static_cast<unsigned>(v);
      } catch (const std::exception&) {
        std::cerr << "error: NHWALK_WORKERS must be a positive integer\n";
        return static_cast<int>(nhwalk::ExitStatus::config_error);
      }
    } else {
      workers = nhwalk::default_workers();
    }
  }
  return nhwalk::run(config, out_dir, workers, std::cerr);
}
