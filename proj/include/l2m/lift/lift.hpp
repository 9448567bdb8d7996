// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "l2m/camera/camera.hpp"
#include "l2m/core/raster.hpp"
#include "l2m/lift/depth_map.hpp"
#include "l2m/lift/mesh.hpp"
#include "l2m/lift/point_cloud.hpp"

namespace l2m {

/// out = a * d + b on valid pixels; results <= 0 are invalidated.
/// Throws std::invalid_argument for a <= 0.
DepthMap scale_shift_depth(const DepthMap& d, float a, float b);

/// One point per valid depth pixel, unprojected through k. Colors are taken
/// from the (already linear) image; source pixel coordinates recorded.
PointCloud lift_to_pointcloud(const ImageRGB& image, const DepthMap& d,
                              const Intrinsicsd& k);

/// Organized-grid triangulation: two triangles per fully valid 2x2 quad,
/// culled when max/min vertex depth exceeds 1 + discontinuity_ratio.
/// An empty mesh (too few valid quads) is returned, not thrown.
TriMesh triangulate_depth_grid(const ImageRGB& image, const DepthMap& d,
                               const Intrinsicsd& k,
                               double discontinuity_ratio);

}  // namespace l2m
