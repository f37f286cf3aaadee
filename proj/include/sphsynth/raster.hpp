// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Equirectangular raster geometry and row-major pixel storage.

#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphsynth {

/// Geometry of a full-sphere equirectangular raster.
///
/// Columns are constant longitude, rows constant latitude. The grid always
/// spans 2*pi x pi radians, so width == 2 * height.
class ErpGrid {
 public:
  ErpGrid(int width, int height) : width_(width), height_(height) {
    if (height < 2 || width != 2 * height) {
      throw std::invalid_argument("ErpGrid: expected width == 2*height and height >= 2, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixels() const { return static_cast<std::size_t>(width_) * height_; }

  /// Radians per column.
  double lon_step() const { return 2.0 * std::numbers::pi / width_; }
  /// Radians per row.
  double lat_step() const { return std::numbers::pi / height_; }
  /// Smallest latitude any computation that leaves the grid may reach.
  double lat_min() const { return lat_step() / 4.0; }
  double lat_max() const { return std::numbers::pi - lat_min(); }

  int wrap_col(int u) const {
    int r = u % width_;
    return r < 0 ? r + width_ : r;
  }
  int clamp_row(int v) const { return v < 0 ? 0 : (v >= height_ ? height_ - 1 : v); }

  bool operator==(const ErpGrid&) const = default;

 private:
  int width_;
  int height_;
};

/// Row-major multi-channel raster on an ErpGrid. Channels are interleaved.
template <typename T>
class Raster {
 public:
  explicit Raster(ErpGrid grid, int channels = 1, T fill = T{})
      : grid_(grid), channels_(channels), data_(grid.pixels() * channels, fill) {
    if (channels < 1) throw std::invalid_argument("Raster: channels must be >= 1");
  }

  const ErpGrid& grid() const { return grid_; }
  int width() const { return grid_.width(); }
  int height() const { return grid_.height(); }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int u, int v, int c = 0) const {
    return (static_cast<std::size_t>(v) * grid_.width() + u) * channels_ + c;
  }
  T& operator()(int u, int v, int c = 0) { return data_[index(u, v, c)]; }
  const T& operator()(int u, int v, int c = 0) const { return data_[index(u, v, c)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  ErpGrid grid_;
  int channels_;
  std::vector<T> data_;
};

/// Linear RGB in [0, 1], three interleaved channels.
using Image = Raster<double>;
/// Single-channel real-valued raster (depth in meters, weights, loss maps).
using ScalarMap = Raster<double>;
using DepthMap = Raster<double>;
/// Binary raster, one byte per pixel.
using Mask = Raster<std::uint8_t>;

inline constexpr int kColorChannels = 3;

inline Image make_image(const ErpGrid& grid, double fill = 0.0) {
  return Image(grid, kColorChannels, fill);
}

template <typename A, typename B>
void require_same_grid(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument(std::string(what) + ": grid mismatch (" +
                                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()) + ")");
  }
}

/// Raised when an iterative computation produces non-finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sphsynth
