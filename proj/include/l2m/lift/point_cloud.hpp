// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace l2m {

/// Colored point cloud in the camera frame of its source view.
struct PointCloud {
  Eigen::Matrix<double, Eigen::Dynamic, 3> points;    // meters, z > 0
  Eigen::Matrix<float, Eigen::Dynamic, 3> colors;     // linear RGB
  Eigen::Matrix<int, Eigen::Dynamic, 2> source_pixel; // (x, y)

  Eigen::Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
};

}  // namespace l2m
