// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Raster files. Depth is a single-channel little-endian PFM ("Pf", negative
// scale) holding float32 samples; rows are stored bottom-up on disk and
// returned top-down. Color is binary 8-bit PPM (P6), masks binary PGM (P5).

#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "sphsynth/raster.hpp"

namespace sphsynth {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_pfm(const std::string& path, const ScalarMap& map);
/// Accepts "Pf" with either byte order; rejects "PF" (3-channel) files.
ScalarMap load_pfm(const std::string& path);

/// Values are clamped to [0, 1] and rounded to the nearest of 256 levels.
void save_ppm(const std::string& path, const Image& img);
Image load_ppm(const std::string& path);

/// Nonzero mask entries are written as 255.
void save_pgm(const std::string& path, const Mask& mask);
Mask load_pgm(const std::string& path);

std::uint8_t quantize8(double x);

using Manifest = std::map<std::string, std::string>;

/// One "key value" pair per line, keys sorted.
void save_manifest(const std::string& path, const Manifest& m);
Manifest load_manifest(const std::string& path);
/// Throws IoError naming the file when the key is absent.
const std::string& manifest_get(const Manifest& m, const std::string& key,
                                const std::string& path);

}  // namespace sphsynth
