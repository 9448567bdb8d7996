// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

#include "l2m/camera/camera.hpp"
#include "l2m/core/raster.hpp"
#include "l2m/lift/point_cloud.hpp"

namespace l2m {

/// Feature map: d channels of row-major float, co-registered with an image.
using FeatureMap = RasterF;

/// Anisotropic 3D Gaussian carrying opacity, degree-0 SH color, and a
/// distilled feature vector. Lives in the world frame.
struct Gaussian3D {
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  Eigen::Vector3d scale = Eigen::Vector3d::Ones();      // > 0, meters
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  double opacity = 1.0;                                  // [0, 1]
  Eigen::Vector3f sh = Eigen::Vector3f::Zero();          // degree-0 color
  Eigen::VectorXf feature;                               // d values

  Eigen::Matrix3d covariance() const {
    const Eigen::Matrix3d r = orientation.toRotationMatrix();
    return r * scale.array().square().matrix().asDiagonal() * r.transpose();
  }
};

/// 2D image footprint of a projected Gaussian.
struct SplatFootprint {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  // pixels
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();  // pixels^2
  double depth = 0.0;   // camera-space z, meters
  bool culled = false;  // behind the camera
};

struct GaussianInitOptions {
  int stride = 2;
  double init_opacity = 0.8;
};

/// One Gaussian per stride-subsampled cloud point: mu = point, isotropic
/// scale from the back-projected pixel footprint (stride * depth / fx),
/// identity orientation, color from the point, feature from the map at the
/// source pixel.
std::vector<Gaussian3D> init_gaussians_from_cloud(
    const PointCloud& cloud, const FeatureMap& features,
    const Intrinsicsd& k_source, const GaussianInitOptions& opts);

/// EWA-style affine projection: covariance = J * Sigma_cam * J^T with the
/// pinhole Jacobian at mu, plus a 0.3 px^2 diagonal regularizer. Gaussians
/// behind the camera come back with culled = true.
SplatFootprint project_gaussian(const Gaussian3D& g, const Intrinsicsd& k,
                                const Posed& pose);

}  // namespace l2m
