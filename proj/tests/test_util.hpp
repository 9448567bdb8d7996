// SPDX-License-Identifier: Apache-2.0
//
// Shared synthetic scenes and independent oracles for the test suites. The
// oracles deliberately re-derive results from first principles instead of
// calling back into the code they check.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "l2m/camera/camera.hpp"
#include "l2m/core/raster.hpp"
#include "l2m/core/rng.hpp"
#include "l2m/lift/depth_map.hpp"
#include "l2m/lift/mesh.hpp"

namespace l2m::testing {

/// Smooth colorful test image (sinusoid mix, linear RGB).
inline ImageRGB make_test_image(int w, int h, double phase = 0.0) {
  ImageRGB image(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) / w;
      const double v = static_cast<double>(y) / h;
      image.at(x, y, 0) =
          static_cast<float>(0.5 + 0.4 * std::sin(6.0 * u + phase));
      image.at(x, y, 1) =
          static_cast<float>(0.5 + 0.4 * std::cos(5.0 * v + phase));
      image.at(x, y, 2) =
          static_cast<float>(0.5 + 0.3 * std::sin(4.0 * (u + v) + phase));
    }
  }
  return image;
}

/// Smooth depth: slanted plane plus a gentle bump, everything valid.
inline DepthMap make_smooth_depth(int w, int h, double base = 2.0) {
  DepthMap depth(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) / w;
      const double v = static_cast<double>(y) / h;
      const double d =
          base + 0.3 * u + 0.2 * v + 0.15 * std::sin(3.0 * u) * std::cos(2.0 * v);
      depth.set(x, y, static_cast<float>(d));
    }
  }
  return depth;
}

inline Intrinsicsd make_intrinsics(int w, int h, double focal_frac = 0.7) {
  const double f = focal_frac * w;
  return Intrinsicsd(f, f, w / 2.0, h / 2.0, w, h);
}

/// Random small mesh with vertices in a [-1, 1]^2 x [z_min, z_max] slab.
inline TriMesh make_random_mesh(Rng& rng, int faces, double z_min = 1.0,
                                double z_max = 4.0) {
  TriMesh mesh;
  const int v = faces * 3;
  mesh.vertices.resize(v, 3);
  mesh.faces.resize(faces, 3);
  mesh.vertex_colors.resize(v, 3);
  for (int i = 0; i < v; ++i) {
    mesh.vertices(i, 0) = uniform(rng, -1.0, 1.0);
    mesh.vertices(i, 1) = uniform(rng, -1.0, 1.0);
    mesh.vertices(i, 2) = uniform(rng, z_min, z_max);
    for (int c = 0; c < 3; ++c) {
      mesh.vertex_colors(i, c) = static_cast<float>(uniform(rng, 0.0, 1.0));
    }
  }
  for (int f = 0; f < faces; ++f) {
    mesh.faces(f, 0) = 3 * f;
    mesh.faces(f, 1) = 3 * f + 1;
    mesh.faces(f, 2) = 3 * f + 2;
  }
  compute_vertex_normals(mesh);
  return mesh;
}

/// Moller-Trumbore ray/triangle intersection. Ray origin 0, direction d
/// (unnormalized); returns the parameter t (camera depth when d.z == 1).
inline std::optional<double> intersect_triangle(const Eigen::Vector3d& dir,
                                                const Eigen::Vector3d& a,
                                                const Eigen::Vector3d& b,
                                                const Eigen::Vector3d& c) {
  const Eigen::Vector3d e1 = b - a;
  const Eigen::Vector3d e2 = c - a;
  const Eigen::Vector3d pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Eigen::Vector3d tvec = -a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Eigen::Vector3d qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= 0.0) return std::nullopt;
  return t;
}

/// Reference depth at pixel (x, y): nearest intersection over all faces of
/// the camera-frame mesh.
inline std::optional<double> raycast_depth(const TriMesh& mesh,
                                           const Intrinsicsd& k,
                                           const Posed& pose, int x, int y) {
  const Eigen::Vector3d dir((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
  const Eigen::Matrix3d rot = pose.rotation();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3d a =
        rot * mesh.vertices.row(mesh.faces(f, 0)).transpose() + pose.t;
    const Eigen::Vector3d b =
        rot * mesh.vertices.row(mesh.faces(f, 1)).transpose() + pose.t;
    const Eigen::Vector3d c =
        rot * mesh.vertices.row(mesh.faces(f, 2)).transpose() + pose.t;
    if (const auto t = intersect_triangle(dir, a, b, c)) {
      best = std::min(best, *t);
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

/// Bitwise raster equality; unlike operator==, treats equal NaN patterns as
/// equal (warp sentinels).
template <typename T>
bool raster_bytes_equal(const Raster<T>& a, const Raster<T>& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

}  // namespace l2m::testing
