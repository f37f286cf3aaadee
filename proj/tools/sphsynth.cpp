// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "sphsynth/cli.hpp"

int main(int argc, char** argv) { return sphsynth::run_cli(argc, argv, std::cout, std::cerr); }
