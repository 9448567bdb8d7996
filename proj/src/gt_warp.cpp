// SPDX-License-Identifier: Apache-2.0
#include "l2m/warp/gt_warp.hpp"

#include <cmath>

namespace l2m {

bool sample_depth_bilinear(const DepthMap& depth, double x, double y,
                           double* out) {
  const int w = depth.width();
  const int h = depth.height();
  if (x < 0.0 || y < 0.0 || x > w - 1 || y > h - 1) return false;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  if (!depth.is_valid(x0, y0) || !depth.is_valid(x1, y0) ||
      !depth.is_valid(x0, y1) || !depth.is_valid(x1, y1)) {
    return false;
  }
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * depth.depth(x0, y0) + fx * depth.depth(x1, y0);
  const double bot = (1.0 - fx) * depth.depth(x0, y1) + fx * depth.depth(x1, y1);
  *out = (1.0 - fy) * top + fy * bot;
  return true;
}

std::pair<WarpField, CertaintyMap> compute_gt_warp(
    const DepthMap& depth1, const Intrinsicsd& k1, const Intrinsicsd& k2,
    const Posed& pose12, const DepthMap& depth2, double occlusion_tolerance) {
  if (depth1.width() != k1.width || depth1.height() != k1.height ||
      depth2.width() != k2.width || depth2.height() != k2.height) {
    throw std::invalid_argument("compute_gt_warp: depth/intrinsics mismatch");
  }
  const int w = depth1.width();
  const int h = depth1.height();
  WarpField warp(w, h);
  CertaintyMap certainty(w, h);

  const Eigen::Matrix3d rot = pose12.rotation();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth1.is_valid(x, y)) continue;
      const Eigen::Vector3d p1 =
          unproject<double>(x, y, depth1.depth(x, y), k1);
      const Eigen::Vector3d p2 = rot * p1 + pose12.t;
      if (!(p2.z() > 0.0)) continue;
      const double u = k2.fx * p2.x() / p2.z() + k2.cx;
      const double v = k2.fy * p2.y() / p2.z() + k2.cy;
      if (!inside_image(u, v, k2)) continue;
      double d2;
      if (!sample_depth_bilinear(depth2, u, v, &d2)) continue;
      if (p2.z() > d2 * (1.0 + occlusion_tolerance)) continue;
      warp.set(x, y, static_cast<float>(u), static_cast<float>(v));
      certainty.values.at(x, y) = 1.0f;
    }
  }
  return {std::move(warp), std::move(certainty)};
}

}  // namespace l2m
