// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace l2m {

/// Triangle mesh with per-vertex colors and unit normals. Vertices live in
/// the camera frame of the source view (the pipeline's world frame).
struct TriMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 3> vertices;
  Eigen::Matrix<int, Eigen::Dynamic, 3> faces;
  Eigen::Matrix<float, Eigen::Dynamic, 3> vertex_colors;
  Eigen::Matrix<double, Eigen::Dynamic, 3> vertex_normals;

  Eigen::Index vertex_count() const { return vertices.rows(); }
  Eigen::Index face_count() const { return faces.rows(); }
  bool empty() const { return faces.rows() == 0; }
};

/// Area-weighted vertex normals, renormalized, flipped toward the origin
/// (depth meshes are single-sided and watched from the source camera).
/// Isolated vertices get the unit direction back toward the camera.
void compute_vertex_normals(TriMesh& mesh);

}  // namespace l2m
