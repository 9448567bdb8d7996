// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "l2m/gaussians/render.hpp"

namespace l2m {

struct FitTarget {
  FeatureMap features;  // what the view should render to
  Intrinsicsd k;
  Posed pose;
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;  // relative residual ||A f - b|| / ||b||
  FeatureRenderOptions render;
};

struct FitResult {
  // One row per Gaussian, d columns; rows of never-visible Gaussians keep
  // their initialization.
  Eigen::MatrixXf features;
  std::vector<std::uint8_t> fitted;     // 0 = zero compositing weight
  std::vector<double> residual_history; // relative, non-increasing
};

/// Distills features with the geometry held fixed: compositing is linear in
/// f, so the multi-view L2 fit is a sparse least-squares problem, solved by
/// conjugate gradient on the normal equations (CGLS) with Jacobi
/// preconditioning.
FitResult fit_features(const std::vector<Gaussian3D>& gaussians,
                       const std::vector<FitTarget>& targets,
                       const FitOptions& opts = {});

/// Writes a FitResult's rows back onto the Gaussian set.
void apply_features(std::vector<Gaussian3D>& gaussians, const FitResult& fit);

/// Mean absolute difference over masked pixels and channels.
/// Throws when the mask selects nothing.
double feature_l1_loss(const FeatureMap& rendered, const FeatureMap& target,
                       const RasterU8& mask);

}  // namespace l2m
