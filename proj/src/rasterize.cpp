// SPDX-License-Identifier: Apache-2.0
#include "l2m/render/rasterize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace l2m {

namespace {

struct ClipVertex {
  Eigen::Vector3d cam;     // camera-space position
  Eigen::Vector3d world;   // world-space position (lighting frame)
  Eigen::Vector3d normal;  // world-space, unnormalized after lerp
  Eigen::Vector3f color;   // linear albedo
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  ClipVertex out;
  out.cam = a.cam + t * (b.cam - a.cam);
  out.world = a.world + t * (b.world - a.world);
  out.normal = a.normal + t * (b.normal - a.normal);
  out.color = a.color + static_cast<float>(t) * (b.color - a.color);
  return out;
}

/// Sutherland-Hodgman against the plane z = near. Returns 0..4 vertices.
int clip_near(const std::array<ClipVertex, 3>& in, double near_z,
              std::array<ClipVertex, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& cur = in[i];
    const ClipVertex& nxt = in[(i + 1) % 3];
    const bool cur_in = cur.cam.z() > near_z;
    const bool nxt_in = nxt.cam.z() > near_z;
    if (cur_in) out[n++] = cur;
    if (cur_in != nxt_in) {
      const double t = (near_z - cur.cam.z()) / (nxt.cam.z() - cur.cam.z());
      out[n++] = lerp(cur, nxt, t);
    }
  }
  return n;
}

inline double edge(double ax, double ay, double bx, double by, double px,
                   double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

/// Top-left rule: a boundary pixel belongs to the edge whose interior lies
/// below (top edge) or to the right (left edge).
inline bool edge_accepts_zero(double ax, double ay, double bx, double by) {
  const double dy = by - ay;
  return dy < 0.0 || (dy == 0.0 && (bx - ax) > 0.0);
}

Eigen::Vector3f shade(const Eigen::Vector3f& albedo,
                      const Eigen::Vector3d& position,
                      const Eigen::Vector3d& normal,
                      const std::vector<PointLight>& lights,
                      const RenderOptions& opts) {
  Eigen::Vector3d irradiance(opts.ambient, opts.ambient, opts.ambient);
  for (const PointLight& light : lights) {
    const Eigen::Vector3d to_light = light.position - position;
    const double len = to_light.norm();
    if (len == 0.0) continue;
    const double cosine = std::max(0.0, normal.dot(to_light) / len);
    const double dist = std::max(len, opts.min_light_distance);
    irradiance +=
        (light.intensity * cosine / (dist * dist)) * light.color.cast<double>();
  }
  Eigen::Vector3f out;
  for (int c = 0; c < 3; ++c) {
    const double v = albedo[c] * irradiance[c] * opts.exposure;
    out[c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

}  // namespace

RenderOutput rasterize(const TriMesh& mesh, const Intrinsicsd& k,
                       const Posed& pose, const std::vector<PointLight>& lights,
                       const RenderOptions& opts) {
  const int w = k.width;
  const int h = k.height;
  RenderOutput out;
  out.image = ImageRGB(w, h, 3, 0.0f);
  out.depth = DepthMap(w, h);
  out.coverage = RasterU8(w, h, 1, 0);
  if (mesh.empty()) return out;

  std::vector<float> zbuf(static_cast<std::size_t>(w) * h,
                          std::numeric_limits<float>::infinity());

  const Eigen::Matrix3d rot = pose.rotation();
  const bool lit = opts.shading == Shading::kLit;

  // Camera-space vertices once; clipping and shading pull per-face.
  Eigen::Matrix<double, Eigen::Dynamic, 3> cam_verts =
      (mesh.vertices * rot.transpose()).rowwise() + pose.t.transpose();

  for (Eigen::Index f = 0; f < mesh.face_count(); ++f) {
    std::array<ClipVertex, 3> tri;
    bool any_in_front = false;
    for (int j = 0; j < 3; ++j) {
      const int vi = mesh.faces(f, j);
      tri[j].cam = cam_verts.row(vi);
      tri[j].world = mesh.vertices.row(vi);
      tri[j].normal = mesh.vertex_normals.row(vi);
      tri[j].color = mesh.vertex_colors.row(vi);
      any_in_front |= tri[j].cam.z() > opts.near_clip;
    }
    if (!any_in_front) continue;

    std::array<ClipVertex, 4> poly;
    const int nverts = clip_near(tri, opts.near_clip, poly);
    if (nverts < 3) continue;

    for (int sub = 0; sub + 2 < nverts; ++sub) {
      ClipVertex v0 = poly[0];
      ClipVertex v1 = poly[sub + 1];
      ClipVertex v2 = poly[sub + 2];

      Eigen::Vector3d p0 = project(v0.cam, k);
      Eigen::Vector3d p1 = project(v1.cam, k);
      Eigen::Vector3d p2 = project(v2.cam, k);

      double area2 = edge(p0.x(), p0.y(), p1.x(), p1.y(), p2.x(), p2.y());
      if (area2 == 0.0) continue;
      if (area2 < 0.0) {
        std::swap(v1, v2);
        std::swap(p1, p2);
        area2 = -area2;
      }

      const int min_x = std::max(
          0, static_cast<int>(std::ceil(std::min({p0.x(), p1.x(), p2.x()}))));
      const int max_x = std::min(
          w - 1,
          static_cast<int>(std::floor(std::max({p0.x(), p1.x(), p2.x()}))));
      const int min_y = std::max(
          0, static_cast<int>(std::ceil(std::min({p0.y(), p1.y(), p2.y()}))));
      const int max_y = std::min(
          h - 1,
          static_cast<int>(std::floor(std::max({p0.y(), p1.y(), p2.y()}))));
      if (min_x > max_x || min_y > max_y) continue;

      const bool tl0 = edge_accepts_zero(p1.x(), p1.y(), p2.x(), p2.y());
      const bool tl1 = edge_accepts_zero(p2.x(), p2.y(), p0.x(), p0.y());
      const bool tl2 = edge_accepts_zero(p0.x(), p0.y(), p1.x(), p1.y());

      const double inv_z0 = 1.0 / v0.cam.z();
      const double inv_z1 = 1.0 / v1.cam.z();
      const double inv_z2 = 1.0 / v2.cam.z();

      for (int py = min_y; py <= max_y; ++py) {
        for (int px = min_x; px <= max_x; ++px) {
          const double x = px;
          const double y = py;
          const double e0 = edge(p1.x(), p1.y(), p2.x(), p2.y(), x, y);
          const double e1 = edge(p2.x(), p2.y(), p0.x(), p0.y(), x, y);
          const double e2 = edge(p0.x(), p0.y(), p1.x(), p1.y(), x, y);
          if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) continue;
          if ((e0 == 0.0 && !tl0) || (e1 == 0.0 && !tl1) ||
              (e2 == 0.0 && !tl2)) {
            continue;
          }

          const double l0 = e0 / area2;
          const double l1 = e1 / area2;
          const double l2 = e2 / area2;
          const double inv_z = l0 * inv_z0 + l1 * inv_z1 + l2 * inv_z2;
          const double z = 1.0 / inv_z;
          const float zf = static_cast<float>(z);

          const std::size_t idx = static_cast<std::size_t>(py) * w + px;
          if (!(zf < zbuf[idx])) continue;
          zbuf[idx] = zf;

          // Perspective-correct weights.
          const double w0 = l0 * inv_z0 * z;
          const double w1 = l1 * inv_z1 * z;
          const double w2 = l2 * inv_z2 * z;

          Eigen::Vector3f albedo =
              (w0 * v0.color.cast<double>() + w1 * v1.color.cast<double>() +
               w2 * v2.color.cast<double>())
                  .cast<float>();
          Eigen::Vector3f rgb;
          if (lit) {
            const Eigen::Vector3d position =
                w0 * v0.world + w1 * v1.world + w2 * v2.world;
            Eigen::Vector3d normal =
                w0 * v0.normal + w1 * v1.normal + w2 * v2.normal;
            const double nlen = normal.norm();
            if (nlen > 0.0) normal /= nlen;
            rgb = shade(albedo, position, normal, lights, opts);
          } else {
            for (int c = 0; c < 3; ++c) {
              rgb[c] = std::clamp(albedo[c], 0.0f, 1.0f);
            }
          }
          out.image.at(px, py, 0) = rgb[0];
          out.image.at(px, py, 1) = rgb[1];
          out.image.at(px, py, 2) = rgb[2];
          out.depth.set(px, py, zf);
          out.coverage.at(px, py) = 1;
        }
      }
    }
  }
  return out;
}

}  // namespace l2m
