// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>

#include "l2m/core/raster.hpp"

namespace l2m {

/// Per-pixel map into the partner image. Invalid pixels carry NaN targets.
struct WarpField {
  RasterF target;  // 2 channels: (x, y) in partner image

  WarpField() = default;
  WarpField(int width, int height)
      : target(width, height, 2, std::numeric_limits<float>::quiet_NaN()) {}

  int width() const { return target.width(); }
  int height() const { return target.height(); }

  bool is_valid(int x, int y) const {
    return std::isfinite(target.at(x, y, 0)) &&
           std::isfinite(target.at(x, y, 1));
  }

  void set(int x, int y, float tx, float ty) {
    target.at(x, y, 0) = tx;
    target.at(x, y, 1) = ty;
  }

  void invalidate(int x, int y) {
    target.at(x, y, 0) = std::numeric_limits<float>::quiet_NaN();
    target.at(x, y, 1) = std::numeric_limits<float>::quiet_NaN();
  }
};

/// Certainty in [0, 1]; zero wherever the warp is invalid. Ground-truth
/// labels are binary covisibility.
struct CertaintyMap {
  RasterF values;

  CertaintyMap() = default;
  CertaintyMap(int width, int height) : values(width, height, 1, 0.0f) {}

  int width() const { return values.width(); }
  int height() const { return values.height(); }
};

}  // namespace l2m
