// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <vector>

#include "l2m/camera/camera.hpp"
#include "l2m/core/rng.hpp"
#include "l2m/eval/matches.hpp"

namespace l2m {

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Normalized eight-point algorithm: intrinsics to camera rays, Hartley
/// conditioning, linear least squares, then projection onto the essential
/// manifold (singular values 1, 1, 0 => ||E||_F = sqrt(2)). The sign is
/// canonicalized so the largest-magnitude coefficient is positive.
/// Throws EstimationError for N < 8 or a rank-deficient system.
Eigen::Matrix3d estimate_essential_8pt(const MatchSet& matches,
                                       const Intrinsicsd& k1,
                                       const Intrinsicsd& k2);

/// Squared Sampson distance of a normalized correspondence to E.
double sampson_distance_sq(const Eigen::Matrix3d& e, const Eigen::Vector3d& x1,
                           const Eigen::Vector3d& x2);

struct RansacOptions {
  double threshold_px = 0.5;
  int max_iterations = 10000;
  double confidence = 0.99999;
};

struct RansacResult {
  Eigen::Matrix3d essential;
  std::vector<std::uint8_t> inliers;
  int inlier_count = 0;
};

/// Eight-point RANSAC with Sampson scoring in normalized coordinates (the
/// pixel threshold is divided by the mean focal length of both cameras),
/// adaptive iteration count, and a final refit on the best inlier set.
/// Deterministic given the caller's RNG state.
RansacResult ransac_essential(const MatchSet& matches, const Intrinsicsd& k1,
                              const Intrinsicsd& k2, const RansacOptions& opts,
                              Rng& rng);

struct RelativePoseEstimate {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;  // unit norm, defined up to sign by E
};

/// Picks among the four (R, t) factorizations of E by the cheirality vote
/// of midpoint-triangulated matches. Throws EstimationError when no
/// candidate places any point in front of both cameras.
RelativePoseEstimate decompose_essential(const Eigen::Matrix3d& e,
                                         const MatchSet& matches,
                                         const Intrinsicsd& k1,
                                         const Intrinsicsd& k2);

}  // namespace l2m
