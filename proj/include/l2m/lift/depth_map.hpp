// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "l2m/core/raster.hpp"

namespace l2m {

/// Per-pixel metric depth with a validity mask. Valid pixels carry finite
/// depth > 0; invalid pixels hold 0.
struct DepthMap {
  RasterF values;    // 1 channel, meters
  RasterU8 valid;    // 1 channel, 0/1

  DepthMap() = default;
  DepthMap(int width, int height)
      : values(width, height, 1, 0.0f), valid(width, height, 1, 0) {}

  int width() const { return values.width(); }
  int height() const { return values.height(); }

  bool is_valid(int x, int y) const { return valid.at(x, y) != 0; }
  float depth(int x, int y) const { return values.at(x, y); }

  void set(int x, int y, float d) {
    if (std::isfinite(d) && d > 0.0f) {
      values.at(x, y) = d;
      valid.at(x, y) = 1;
    } else {
      values.at(x, y) = 0.0f;
      valid.at(x, y) = 0;
    }
  }

  void invalidate(int x, int y) {
    values.at(x, y) = 0.0f;
    valid.at(x, y) = 0;
  }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < valid.size(); ++i) n += valid.data()[i] != 0;
    return n;
  }

  /// Median over valid pixels; 0 if none.
  float median() const {
    std::vector<float> v;
    v.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (valid.data()[i]) v.push_back(values.data()[i]);
    }
    if (v.empty()) return 0.0f;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
  }
};

}  // namespace l2m
