// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

#include "l2m/camera/camera.hpp"
#include "l2m/core/rng.hpp"

namespace l2m {

struct PoseRanges {
  double max_rotation_deg = 15.0;
  double max_translation_frac = 0.15;
};

/// Draws fx = fy = u * width with u uniform in [low, high]; principal point
/// centered. Consumes exactly one uniform draw.
inline Intrinsicsd sample_intrinsics(Rng& rng, int width, int height,
                                     double focal_low, double focal_high) {
  if (!(focal_low > 0.0) || focal_low > focal_high) {
    throw std::invalid_argument("sample_intrinsics: invalid focal range");
  }
  const double f = uniform(rng, focal_low, focal_high) * width;
  return Intrinsicsd(f, f, width / 2.0, height / 2.0, width, height);
}

/// Rotation axis uniform on the sphere, angle uniform in [0, max_rotation];
/// translation uniform in a cube of half-extent max_translation_frac *
/// median_depth. Draw order: axis (2), angle (1), translation (3).
inline Posed sample_pose(Rng& rng, const PoseRanges& ranges,
                         double median_depth) {
  if (ranges.max_rotation_deg < 0.0 || ranges.max_translation_frac < 0.0) {
    throw std::invalid_argument("sample_pose: ranges must be non-negative");
  }
  const Eigen::Vector3d axis = uniform_unit_vector(rng);
  const double angle =
      uniform(rng, 0.0, ranges.max_rotation_deg) * EIGEN_PI / 180.0;
  const double half = ranges.max_translation_frac * median_depth;
  Eigen::Vector3d t;
  for (int i = 0; i < 3; ++i) t[i] = uniform(rng, -half, half);
  Posed pose;
  pose.q = Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)).normalized();
  pose.t = t;
  return pose;
}

}  // namespace l2m
