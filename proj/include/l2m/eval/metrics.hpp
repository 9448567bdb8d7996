// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <map>
#include <vector>

#include "l2m/warp/warp_field.hpp"

namespace l2m {

struct EndpointStats {
  double mean_epe = 0.0;                 // pixels
  std::map<double, double> pck;          // threshold (px) -> fraction
  std::size_t evaluated_pixels = 0;
};

/// Endpoint error over pixels valid in both fields with certainty 1;
/// PCK at 1, 3, 5 px. Throws when no pixel qualifies.
EndpointStats endpoint_error(const WarpField& pred, const WarpField& gt,
                             const CertaintyMap& certainty_gt);

struct PoseError {
  double rotation_deg = 0.0;
  double translation_deg = 0.0;
  double combined_deg = 0.0;  // max of the two
};

/// Rotation angle of R_est * R_gt^T and sign-invariant angle between the
/// translation directions. A near-zero ground-truth translation gives 0 if
/// the estimate is also near-zero, else 180.
PoseError pose_error(const Eigen::Matrix3d& r_est,
                     const Eigen::Vector3d& t_est,
                     const Eigen::Matrix3d& r_gt, const Eigen::Vector3d& t_gt);

/// Exact AUC of the accuracy-vs-threshold step function, in percent:
/// AUC@tau = 100 / (tau * N) * sum_i max(0, tau - err_i).
/// Failures are encoded as +infinity. Thresholds must be positive ascending.
std::vector<double> pose_auc(const std::vector<double>& errors_deg,
                             const std::vector<double>& thresholds_deg);

}  // namespace l2m
