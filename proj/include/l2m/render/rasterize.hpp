// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "l2m/camera/camera.hpp"
#include "l2m/core/raster.hpp"
#include "l2m/lift/depth_map.hpp"
#include "l2m/lift/mesh.hpp"
#include "l2m/render/light.hpp"

namespace l2m {

enum class Shading { kAlbedo, kLit };

struct RenderOptions {
  Shading shading = Shading::kLit;
  double ambient = 0.1;
  double exposure = 1.0 / 3000.0;
  double min_light_distance = 0.05;  // inverse-square falloff clamp, meters
  double near_clip = 1e-4;           // meters
};

struct RenderOutput {
  ImageRGB image;    // linear RGB, clamped to [0, 1]
  DepthMap depth;    // nearest-surface depth
  RasterU8 coverage; // 0/1

  bool covered(int x, int y) const { return coverage.at(x, y) != 0; }
};

/// Z-buffered triangle rasterization with perspective-correct interpolation
/// and the top-left fill rule. Lit shading is Lambertian with point lights:
///   albedo * (ambient + sum_j color_j * I_j * max(0, n.l_j) / d_j^2) * exposure
/// clamped to [0, 1]. Pixel (x, y) samples the ray through (u, v) = (x, y).
RenderOutput rasterize(const TriMesh& mesh, const Intrinsicsd& k,
                       const Posed& pose, const std::vector<PointLight>& lights,
                       const RenderOptions& opts);

}  // namespace l2m
