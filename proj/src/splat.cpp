// SPDX-License-Identifier: Apache-2.0
#include "l2m/warp/splat.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace l2m {

SplatResult splat_points(const PointCloud& cloud, const Intrinsicsd& k2,
                         const Posed& pose12, int splat_radius) {
  if (splat_radius < 0) {
    throw std::invalid_argument("splat_points: splat_radius must be >= 0");
  }
  const int w = k2.width;
  const int h = k2.height;
  SplatResult out;
  out.image = ImageRGB(w, h, 3, 0.0f);
  out.depth = DepthMap(w, h);
  out.coverage = RasterU8(w, h, 1, 0);
  if (cloud.empty()) return out;

  std::vector<float> zbuf(static_cast<std::size_t>(w) * h,
                          std::numeric_limits<float>::infinity());
  const Eigen::Matrix3d rot = pose12.rotation();

  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = rot * cloud.points.row(i).transpose() + pose12.t;
    if (!(p.z() > 0.0)) continue;
    const double u = k2.fx * p.x() / p.z() + k2.cx;
    const double v = k2.fy * p.y() / p.z() + k2.cy;
    const int cx = static_cast<int>(std::floor(u + 0.5));
    const int cy = static_cast<int>(std::floor(v + 0.5));
    if (cx + splat_radius < 0 || cx - splat_radius >= w ||
        cy + splat_radius < 0 || cy - splat_radius >= h) {
      continue;
    }
    const float zf = static_cast<float>(p.z());
    const int x0 = std::max(0, cx - splat_radius);
    const int x1 = std::min(w - 1, cx + splat_radius);
    const int y0 = std::max(0, cy - splat_radius);
    const int y1 = std::min(h - 1, cy + splat_radius);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        // Ascending index iteration + strict test keeps the lowest index
        // on exact depth ties.
        if (zf < zbuf[idx]) {
          zbuf[idx] = zf;
          out.image.at(x, y, 0) = cloud.colors(i, 0);
          out.image.at(x, y, 1) = cloud.colors(i, 1);
          out.image.at(x, y, 2) = cloud.colors(i, 2);
          out.depth.set(x, y, zf);
          out.coverage.at(x, y) = 1;
        }
      }
    }
  }
  return out;
}

namespace {

RasterU8 dilate(const RasterU8& in, int radius) {
  const int w = in.width();
  const int h = in.height();
  RasterU8 out(w, h, 1, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (int dy = -radius; dy <= radius && !v; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          if (in.at(xx, yy)) {
            v = 1;
            break;
          }
        }
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

RasterU8 erode(const RasterU8& in, int radius) {
  const int w = in.width();
  const int h = in.height();
  RasterU8 out(w, h, 1, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = 1;
      for (int dy = -radius; dy <= radius && v; ++dy) {
        const int yy = y + dy;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = x + dx;
          // Out-of-bounds counts as covered so the image border does not
          // erode the closed mask inward.
          if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
          if (!in.at(xx, yy)) {
            v = 0;
            break;
          }
        }
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

}  // namespace

RasterU8 hole_mask(const SplatResult& s, int closing_radius) {
  RasterU8 closed = s.coverage;
  if (closing_radius > 0) {
    closed = erode(dilate(closed, closing_radius), closing_radius);
  }
  RasterU8 mask(closed.width(), closed.height(), 1, 0);
  for (std::size_t i = 0; i < closed.size(); ++i) {
    mask.data()[i] = closed.data()[i] ? 0 : 1;
  }
  return mask;
}

}  // namespace l2m
