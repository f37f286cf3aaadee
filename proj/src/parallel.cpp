// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace sphsynth {

void set_thread_count(int n) { omp_set_num_threads(n < 1 ? 1 : n); }

int thread_count() { return omp_get_max_threads(); }

int configure_threads_from_env() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    try {
      int n = std::stoi(env);
      if (n > 0) set_thread_count(n);
    } catch (const std::exception&) {
      // ignored: malformed values leave the OpenMP default in place
    }
  }
  return thread_count();
}

}  // namespace sphsynth
