// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace sphsynth {

inline constexpr const char* kToolVersion = "0.3.1";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitNumeric = 3,
};

/// Entry point of the `sphsynth` tool. Subcommands: render, synthesize,
/// evaluate, optimize. Reads the thread count from SPHSYNTH_THREADS.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sphsynth
