// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace sphsynth {

/// Environment variable consulted by configure_threads_from_env().
inline constexpr const char* kThreadsEnv = "SPHSYNTH_THREADS";

/// Sets the worker count for all parallel per-pixel loops.
void set_thread_count(int n);
int thread_count();

/// Applies SPHSYNTH_THREADS when set to a positive integer. Returns the
/// resulting worker count.
int configure_threads_from_env();

}  // namespace sphsynth
