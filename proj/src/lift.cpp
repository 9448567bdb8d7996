// SPDX-License-Identifier: Apache-2.0
#include "l2m/lift/lift.hpp"

#include <stdexcept>

namespace l2m {

DepthMap scale_shift_depth(const DepthMap& d, float a, float b) {
  if (!(a > 0.0f)) {
    throw std::invalid_argument("scale_shift_depth: scale must be > 0");
  }
  DepthMap out(d.width(), d.height());
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (d.is_valid(x, y)) out.set(x, y, a * d.depth(x, y) + b);
    }
  }
  return out;
}

PointCloud lift_to_pointcloud(const ImageRGB& image, const DepthMap& d,
                              const Intrinsicsd& k) {
  if (image.width() != d.width() || image.height() != d.height() ||
      image.channels() != 3) {
    throw std::invalid_argument("lift_to_pointcloud: image/depth mismatch");
  }
  if (k.width != d.width() || k.height != d.height()) {
    throw std::invalid_argument("lift_to_pointcloud: intrinsics mismatch");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(d.valid_count());
  PointCloud cloud;
  cloud.points.resize(n, 3);
  cloud.colors.resize(n, 3);
  cloud.source_pixel.resize(n, 2);
  Eigen::Index i = 0;
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (!d.is_valid(x, y)) continue;
      cloud.points.row(i) = unproject<double>(x, y, d.depth(x, y), k);
      for (int c = 0; c < 3; ++c) cloud.colors(i, c) = image.at(x, y, c);
      cloud.source_pixel(i, 0) = x;
      cloud.source_pixel(i, 1) = y;
      ++i;
    }
  }
  return cloud;
}

namespace {

inline bool depth_ratio_ok(float a, float b, float c, double max_ratio) {
  const float lo = std::min(a, std::min(b, c));
  const float hi = std::max(a, std::max(b, c));
  return static_cast<double>(hi) <= max_ratio * static_cast<double>(lo);
}

}  // namespace

TriMesh triangulate_depth_grid(const ImageRGB& image, const DepthMap& d,
                               const Intrinsicsd& k,
                               double discontinuity_ratio) {
  if (!(discontinuity_ratio > 0.0)) {
    throw std::invalid_argument(
        "triangulate_depth_grid: discontinuity_ratio must be > 0");
  }
  const int w = d.width();
  const int h = d.height();

  // Vertex per valid pixel, row-major order.
  std::vector<int> vertex_id(static_cast<std::size_t>(w) * h, -1);
  const PointCloud cloud = lift_to_pointcloud(image, d, k);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    vertex_id[static_cast<std::size_t>(cloud.source_pixel(i, 1)) * w +
              cloud.source_pixel(i, 0)] = static_cast<int>(i);
  }

  TriMesh mesh;
  mesh.vertices = cloud.points;
  mesh.vertex_colors = cloud.colors;

  const double max_ratio = 1.0 + discontinuity_ratio;
  std::vector<int> tri;
  tri.reserve(static_cast<std::size_t>(w) * h * 6);
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      const int tl = vertex_id[static_cast<std::size_t>(y) * w + x];
      const int tr = vertex_id[static_cast<std::size_t>(y) * w + x + 1];
      const int bl = vertex_id[static_cast<std::size_t>(y + 1) * w + x];
      const int br = vertex_id[static_cast<std::size_t>(y + 1) * w + x + 1];
      if (tl < 0 || tr < 0 || bl < 0 || br < 0) continue;
      const float ztl = d.depth(x, y), ztr = d.depth(x + 1, y);
      const float zbl = d.depth(x, y + 1), zbr = d.depth(x + 1, y + 1);
      // Winding (tl, bl, tr) / (tr, bl, br) makes normals face the camera.
      if (depth_ratio_ok(ztl, zbl, ztr, max_ratio)) {
        tri.insert(tri.end(), {tl, bl, tr});
      }
      if (depth_ratio_ok(ztr, zbl, zbr, max_ratio)) {
        tri.insert(tri.end(), {tr, bl, br});
      }
    }
  }

  mesh.faces.resize(static_cast<Eigen::Index>(tri.size() / 3), 3);
  for (Eigen::Index f = 0; f < mesh.faces.rows(); ++f) {
    mesh.faces(f, 0) = tri[3 * f];
    mesh.faces(f, 1) = tri[3 * f + 1];
    mesh.faces(f, 2) = tri[3 * f + 2];
  }
  compute_vertex_normals(mesh);
  return mesh;
}

void compute_vertex_normals(TriMesh& mesh) {
  mesh.vertex_normals =
      Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(mesh.vertex_count(), 3);
  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3d a = mesh.vertices.row(mesh.faces(f, 0));
    const Eigen::Vector3d b = mesh.vertices.row(mesh.faces(f, 1));
    const Eigen::Vector3d c = mesh.vertices.row(mesh.faces(f, 2));
    // Unnormalized cross product = 2 * area * n, so summing area-weights.
    const Eigen::Vector3d n = (b - a).cross(c - a);
    for (int j = 0; j < 3; ++j) mesh.vertex_normals.row(mesh.faces(f, j)) += n;
  }
  for (Eigen::Index v = 0; v < mesh.vertex_count(); ++v) {
    Eigen::Vector3d n = mesh.vertex_normals.row(v);
    const double len = n.norm();
    if (len < 1e-20) {
      n = -mesh.vertices.row(v).transpose();  // isolated: face the camera
      const double plen = n.norm();
      n = plen > 0.0 ? Eigen::Vector3d(n / plen) : Eigen::Vector3d(0, 0, -1);
    } else {
      n /= len;
      if (n.dot(mesh.vertices.row(v)) > 0.0) n = -n;
    }
    mesh.vertex_normals.row(v) = n;
  }
}

}  // namespace l2m
