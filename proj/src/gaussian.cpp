// SPDX-License-Identifier: Apache-2.0
#include "l2m/gaussians/gaussian.hpp"

#include <stdexcept>

namespace l2m {

std::vector<Gaussian3D> init_gaussians_from_cloud(
    const PointCloud& cloud, const FeatureMap& features,
    const Intrinsicsd& k_source, const GaussianInitOptions& opts) {
  if (opts.stride < 1) {
    throw std::invalid_argument("init_gaussians_from_cloud: stride must be >= 1");
  }
  if (opts.init_opacity < 0.0 || opts.init_opacity > 1.0) {
    throw std::invalid_argument(
        "init_gaussians_from_cloud: opacity must be in [0, 1]");
  }
  if (!cloud.empty() && (features.width() != k_source.width ||
                         features.height() != k_source.height)) {
    throw std::invalid_argument(
        "init_gaussians_from_cloud: feature map not aligned with source view");
  }
  std::vector<Gaussian3D> out;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const int px = cloud.source_pixel(i, 0);
    const int py = cloud.source_pixel(i, 1);
    if (px % opts.stride != 0 || py % opts.stride != 0) continue;
    Gaussian3D g;
    g.mu = cloud.points.row(i);
    const double s = opts.stride * g.mu.z() / k_source.fx;
    g.scale = Eigen::Vector3d::Constant(s);
    g.orientation = Eigen::Quaterniond::Identity();
    g.opacity = opts.init_opacity;
    g.sh = cloud.colors.row(i);
    g.feature = features.pixel(px, py);
    out.push_back(std::move(g));
  }
  return out;
}

SplatFootprint project_gaussian(const Gaussian3D& g, const Intrinsicsd& k,
                                const Posed& pose) {
  SplatFootprint fp;
  const Eigen::Matrix3d rot = pose.rotation();
  const Eigen::Vector3d mu_cam = rot * g.mu + pose.t;
  if (!(mu_cam.z() > 0.0)) {
    fp.culled = true;
    return fp;
  }
  fp.depth = mu_cam.z();
  fp.center = {k.fx * mu_cam.x() / mu_cam.z() + k.cx,
               k.fy * mu_cam.y() / mu_cam.z() + k.cy};

  const double inv_z = 1.0 / mu_cam.z();
  Eigen::Matrix<double, 2, 3> jac;
  jac << k.fx * inv_z, 0.0, -k.fx * mu_cam.x() * inv_z * inv_z,
         0.0, k.fy * inv_z, -k.fy * mu_cam.y() * inv_z * inv_z;

  const Eigen::Matrix3d cov_cam = rot * g.covariance() * rot.transpose();
  fp.covariance = jac * cov_cam * jac.transpose();
  fp.covariance.diagonal().array() += 0.3;  // sub-pixel regularizer, px^2
  return fp;
}

}  // namespace l2m
