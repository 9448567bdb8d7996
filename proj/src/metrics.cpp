// SPDX-License-Identifier: Apache-2.0
#include "l2m/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace l2m {

EndpointStats endpoint_error(const WarpField& pred, const WarpField& gt,
                             const CertaintyMap& certainty_gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height() ||
      certainty_gt.width() != gt.width() ||
      certainty_gt.height() != gt.height()) {
    throw std::invalid_argument("endpoint_error: dimension mismatch");
  }
  const std::vector<double> thresholds = {1.0, 3.0, 5.0};
  EndpointStats stats;
  for (double t : thresholds) stats.pck[t] = 0.0;

  double sum = 0.0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      if (!pred.is_valid(x, y) || !gt.is_valid(x, y)) continue;
      if (certainty_gt.values.at(x, y) < 0.5f) continue;
      const double dx = static_cast<double>(pred.target.at(x, y, 0)) -
                        gt.target.at(x, y, 0);
      const double dy = static_cast<double>(pred.target.at(x, y, 1)) -
                        gt.target.at(x, y, 1);
      const double epe = std::hypot(dx, dy);
      sum += epe;
      for (double t : thresholds) {
        if (epe <= t) stats.pck[t] += 1.0;
      }
      ++stats.evaluated_pixels;
    }
  }
  if (stats.evaluated_pixels == 0) {
    throw std::runtime_error("endpoint_error: no overlapping valid pixels");
  }
  stats.mean_epe = sum / static_cast<double>(stats.evaluated_pixels);
  for (double t : thresholds) {
    stats.pck[t] /= static_cast<double>(stats.evaluated_pixels);
  }
  return stats;
}

PoseError pose_error(const Eigen::Matrix3d& r_est,
                     const Eigen::Vector3d& t_est,
                     const Eigen::Matrix3d& r_gt,
                     const Eigen::Vector3d& t_gt) {
  PoseError err;
  const Eigen::Matrix3d r_delta = r_est * r_gt.transpose();
  const double cos_angle =
      std::clamp((r_delta.trace() - 1.0) / 2.0, -1.0, 1.0);
  err.rotation_deg = std::acos(cos_angle) * 180.0 / EIGEN_PI;

  constexpr double kZero = 1e-6;
  const double n_gt = t_gt.norm();
  const double n_est = t_est.norm();
  if (n_gt < kZero || n_est < kZero) {
    // Pure-rotation pairs leave t unobservable; see the module notes.
    err.translation_deg = (n_gt < kZero && n_est < kZero) ? 0.0 : 180.0;
  } else {
    const double c =
        std::clamp(std::abs(t_est.dot(t_gt)) / (n_est * n_gt), 0.0, 1.0);
    err.translation_deg = std::acos(c) * 180.0 / EIGEN_PI;
  }
  err.combined_deg = std::max(err.rotation_deg, err.translation_deg);
  return err;
}

std::vector<double> pose_auc(const std::vector<double>& errors_deg,
                             const std::vector<double>& thresholds_deg) {
  if (errors_deg.empty()) {
    throw std::invalid_argument("pose_auc: empty error list");
  }
  double prev = 0.0;
  for (double t : thresholds_deg) {
    if (!(t > prev)) {
      throw std::invalid_argument("pose_auc: thresholds must be positive ascending");
    }
    prev = t;
  }
  // Exact integral of the sorted-error step function:
  // integral_0^tau acc(t) dt = (1/N) * sum_i max(0, tau - e_i).
  std::vector<double> out;
  out.reserve(thresholds_deg.size());
  const double n = static_cast<double>(errors_deg.size());
  for (double tau : thresholds_deg) {
    double area = 0.0;
    for (double e : errors_deg) {
      if (e < tau) area += tau - e;
    }
    out.push_back(100.0 * area / (tau * n));
  }
  return out;
}

}  // namespace l2m
