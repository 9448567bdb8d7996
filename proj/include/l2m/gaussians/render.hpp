// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/SparseCore>

#include <vector>

#include "l2m/gaussians/gaussian.hpp"

namespace l2m {

struct FeatureRenderResult {
  FeatureMap features;  // d channels
  RasterF alpha;        // accumulated compositing weight, 1 channel
  ImageRGB color;       // degree-0 SH color through the same compositing
};

struct FeatureRenderOptions {
  double cutoff_mahalanobis_sq = 9.0;       // 3-sigma footprint
  double transmittance_epsilon = 1e-4;      // early termination
};

/// Eq.-style front-to-back alpha compositing of the Gaussian set: per pixel
/// x, alpha_i(x) = opacity_i * exp(-0.5 * (x - c_i)^T Sigma_i^-1 (x - c_i))
/// accumulated in depth order (ties by index). Background is zero.
FeatureRenderResult render_features(const std::vector<Gaussian3D>& gaussians,
                                    const Intrinsicsd& k, const Posed& pose,
                                    int width, int height,
                                    const FeatureRenderOptions& opts = {});

/// The same walk, but returning the per-pixel compositing weight matrix
/// W(p, i) = alpha_i(p) * prod_{j<i} (1 - alpha_j(p)); rendering a feature
/// map is exactly W * F for stacked per-Gaussian features F.
Eigen::SparseMatrix<double> composite_weights(
    const std::vector<Gaussian3D>& gaussians, const Intrinsicsd& k,
    const Posed& pose, int width, int height,
    const FeatureRenderOptions& opts = {});

}  // namespace l2m
