// Copyright (c) 2026 The Lectometer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "lectometer/common.hpp"

namespace lectometer::cli {

// Command-line values that take precedence over run-spec fields.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<Pooling> pooling;
  std::optional<double> C;
};

// All commands return a process exit status: 0 on success, 1 on any error.
// Warnings go to `err` and never change the status.

int cmd_validate(const std::filesystem::path& manifest_path, std::ostream& out,
                 std::ostream& err);

int cmd_synth(const std::filesystem::path& spec_path,
              const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);

/// Runs one protocol and writes <run_id>.tsv, <run_id>.json, an optional
/// <run_id>.model.json, and the replayable <run_id>.record.json.
int cmd_run(const std::filesystem::path& run_spec_path,
            const std::filesystem::path& manifest_path,
            const std::filesystem::path& out_dir, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err);

// Full command-line entry point (subcommand parsing).
int main(int argc, char** argv);

}  // namespace lectometer::cli
