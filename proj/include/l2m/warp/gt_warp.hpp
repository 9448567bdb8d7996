// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>

#include "l2m/camera/camera.hpp"
#include "l2m/lift/depth_map.hpp"
#include "l2m/warp/warp_field.hpp"

namespace l2m {

/// Dense ground-truth warp from view 1 to view 2 with binary covisibility
/// certainty. A pixel is covisible when its projection lands inside image 2
/// and its projected depth does not exceed view 2's depth (bilinear sample)
/// by more than the relative occlusion tolerance.
std::pair<WarpField, CertaintyMap> compute_gt_warp(
    const DepthMap& depth1, const Intrinsicsd& k1, const Intrinsicsd& k2,
    const Posed& pose12, const DepthMap& depth2, double occlusion_tolerance);

/// Bilinear depth sample requiring all contributing taps valid.
/// Returns false when the sample is undefined.
bool sample_depth_bilinear(const DepthMap& depth, double x, double y,
                           double* out);

}  // namespace l2m
