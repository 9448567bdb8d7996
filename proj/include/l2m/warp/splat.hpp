// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "l2m/camera/camera.hpp"
#include "l2m/core/raster.hpp"
#include "l2m/lift/depth_map.hpp"
#include "l2m/lift/point_cloud.hpp"

namespace l2m {

struct SplatResult {
  ImageRGB image;     // linear RGB, 0 where uncovered
  DepthMap depth;     // novel-camera depth
  RasterU8 coverage;  // 0/1

  bool covered(int x, int y) const { return coverage.at(x, y) != 0; }
};

/// Forward z-buffer splatting: each point lands on its nearest pixel and a
/// square footprint of the given radius around it; the smallest depth wins,
/// exact ties go to the lowest point index. Points behind the camera are
/// dropped. An empty cloud yields a fully uncovered result.
SplatResult splat_points(const PointCloud& cloud, const Intrinsicsd& k2,
                         const Posed& pose12, int splat_radius);

/// Disocclusion mask: NOT coverage after morphological closing of coverage
/// with a square element of the given radius (radius 0 = plain negation).
RasterU8 hole_mask(const SplatResult& s, int closing_radius);

}  // namespace l2m
