// SPDX-License-Identifier: Apache-2.0
#include "l2m/eval/essential.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace l2m {

namespace {

Eigen::Vector3d normalized_ray(double u, double v, const Intrinsicsd& k) {
  return {(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
}

/// Hartley conditioning: centroid to origin, mean distance sqrt(2).
Eigen::Matrix3d hartley_transform(
    const std::vector<Eigen::Vector3d>& points) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : points) centroid += p.head<2>();
  centroid /= static_cast<double>(points.size());
  double mean_dist = 0.0;
  for (const auto& p : points) mean_dist += (p.head<2>() - centroid).norm();
  mean_dist /= static_cast<double>(points.size());
  const double scale =
      mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = t(1, 1) = scale;
  t(0, 2) = -scale * centroid.x();
  t(1, 2) = -scale * centroid.y();
  return t;
}

Eigen::Matrix3d essential_from_rays(const std::vector<Eigen::Vector3d>& x1,
                                    const std::vector<Eigen::Vector3d>& x2) {
  const Eigen::Index n = static_cast<Eigen::Index>(x1.size());
  const Eigen::Matrix3d t1 = hartley_transform(x1);
  const Eigen::Matrix3d t2 = hartley_transform(x2);

  Eigen::MatrixXd a(n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p1 = t1 * x1[i];
    const Eigen::Vector3d p2 = t2 * x2[i];
    a.row(i) << p2.x() * p1.x(), p2.x() * p1.y(), p2.x() * p1.z(),
        p2.y() * p1.x(), p2.y() * p1.y(), p2.y() * p1.z(),
        p2.z() * p1.x(), p2.z() * p1.y(), p2.z() * p1.z();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(7) < 1e-9 * sv(0)) {
    throw EstimationError(
        "estimate_essential_8pt: rank-deficient (degenerate) system");
  }
  const Eigen::VectorXd e_vec = svd.matrixV().col(8);
  Eigen::Matrix3d e_cond;
  e_cond << e_vec(0), e_vec(1), e_vec(2), e_vec(3), e_vec(4), e_vec(5),
      e_vec(6), e_vec(7), e_vec(8);

  Eigen::Matrix3d e = t2.transpose() * e_cond * t1;

  // Project onto the essential manifold: singular values (1, 1, 0).
  Eigen::JacobiSVD<Eigen::Matrix3d> esvd(
      e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  e = esvd.matrixU() * Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal() *
      esvd.matrixV().transpose();

  // Deterministic sign: largest-magnitude coefficient positive.
  Eigen::Index max_row, max_col;
  e.cwiseAbs().maxCoeff(&max_row, &max_col);
  if (e(max_row, max_col) < 0.0) e = -e;
  return e;
}

std::vector<Eigen::Vector3d> rays_of_view(const MatchSet& matches,
                                          const Intrinsicsd& k, int view) {
  std::vector<Eigen::Vector3d> rays(matches.size());
  const int col = view == 0 ? 0 : 2;
  for (Eigen::Index i = 0; i < matches.size(); ++i) {
    rays[i] =
        normalized_ray(matches.pairs(i, col), matches.pairs(i, col + 1), k);
  }
  return rays;
}

}  // namespace

Eigen::Matrix3d estimate_essential_8pt(const MatchSet& matches,
                                       const Intrinsicsd& k1,
                                       const Intrinsicsd& k2) {
  if (matches.size() < 8) {
    throw EstimationError("estimate_essential_8pt: need at least 8 matches");
  }
  return essential_from_rays(rays_of_view(matches, k1, 0),
                             rays_of_view(matches, k2, 1));
}

double sampson_distance_sq(const Eigen::Matrix3d& e, const Eigen::Vector3d& x1,
                           const Eigen::Vector3d& x2) {
  const Eigen::Vector3d ex1 = e * x1;
  const Eigen::Vector3d etx2 = e.transpose() * x2;
  const double r = x2.dot(ex1);
  const double denom = ex1.head<2>().squaredNorm() + etx2.head<2>().squaredNorm();
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return r * r / denom;
}

RansacResult ransac_essential(const MatchSet& matches, const Intrinsicsd& k1,
                              const Intrinsicsd& k2, const RansacOptions& opts,
                              Rng& rng) {
  const Eigen::Index n = matches.size();
  if (n < 8) {
    throw EstimationError("ransac_essential: need at least 8 matches");
  }
  const std::vector<Eigen::Vector3d> x1 = rays_of_view(matches, k1, 0);
  const std::vector<Eigen::Vector3d> x2 = rays_of_view(matches, k2, 1);

  const double mean_focal = 0.25 * (k1.fx + k1.fy + k2.fx + k2.fy);
  const double thr = opts.threshold_px / mean_focal;
  const double thr_sq = thr * thr;

  auto score = [&](const Eigen::Matrix3d& e, std::vector<std::uint8_t>* mask) {
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool in = sampson_distance_sq(e, x1[i], x2[i]) <= thr_sq;
      if (mask) (*mask)[i] = in ? 1 : 0;
      count += in;
    }
    return count;
  };

  RansacResult best;
  best.inliers.assign(static_cast<std::size_t>(n), 0);
  best.inlier_count = 0;
  long long needed = opts.max_iterations;

  std::vector<Eigen::Index> sample(8);
  std::vector<Eigen::Vector3d> s1(8), s2(8);
  for (long long iter = 0; iter < needed && iter < opts.max_iterations;
       ++iter) {
    // Partial Fisher-Yates over an index pool keeps samples distinct.
    for (int j = 0; j < 8; ++j) {
      Eigen::Index pick;
      bool fresh;
      do {
        pick = static_cast<Eigen::Index>(uniform_int(rng, 0, n - 1));
        fresh = true;
        for (int p = 0; p < j; ++p) fresh &= sample[p] != pick;
      } while (!fresh);
      sample[j] = pick;
    }
    for (int j = 0; j < 8; ++j) {
      s1[j] = x1[sample[j]];
      s2[j] = x2[sample[j]];
    }
    Eigen::Matrix3d e;
    try {
      e = essential_from_rays(s1, s2);
    } catch (const EstimationError&) {
      continue;  // degenerate minimal sample
    }
    const int count = score(e, nullptr);
    if (count > best.inlier_count) {
      best.inlier_count = count;
      best.essential = e;
      score(e, &best.inliers);
      const double w = static_cast<double>(count) / static_cast<double>(n);
      const double p_all = std::pow(w, 8.0);
      if (p_all >= 1.0 - 1e-12) {
        needed = iter + 1;
      } else if (p_all > 0.0) {
        const double k_iters =
            std::log(1.0 - opts.confidence) / std::log(1.0 - p_all);
        needed = std::min<long long>(
            opts.max_iterations,
            static_cast<long long>(std::ceil(k_iters)));
      }
    }
  }

  if (best.inlier_count < 8) {
    throw EstimationError("ransac_essential: no model with >= 8 inliers");
  }

  // Refit on the consensus set, keep it if it does not lose support.
  MatchSet consensus;
  consensus.pairs.resize(best.inlier_count, 4);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (best.inliers[i]) consensus.pairs.row(row++) = matches.pairs.row(i);
  }
  try {
    const Eigen::Matrix3d refit = estimate_essential_8pt(consensus, k1, k2);
    std::vector<std::uint8_t> refit_mask(static_cast<std::size_t>(n), 0);
    const int refit_count = score(refit, &refit_mask);
    if (refit_count >= best.inlier_count) {
      best.essential = refit;
      best.inliers = std::move(refit_mask);
      best.inlier_count = refit_count;
    }
  } catch (const EstimationError&) {
    // keep the minimal-sample model
  }
  return best;
}

RelativePoseEstimate decompose_essential(const Eigen::Matrix3d& e,
                                         const MatchSet& matches,
                                         const Intrinsicsd& k1,
                                         const Intrinsicsd& k2) {
  if (matches.size() < 1) {
    throw EstimationError("decompose_essential: need at least one match");
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;
  Eigen::Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Eigen::Matrix3d r1 = u * w * v.transpose();
  const Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2);

  const std::vector<Eigen::Vector3d> x1 = rays_of_view(matches, k1, 0);
  const std::vector<Eigen::Vector3d> x2 = rays_of_view(matches, k2, 1);

  // Midpoint triangulation; votes need z > 0 in both cameras.
  auto cheirality_votes = [&](const Eigen::Matrix3d& r,
                              const Eigen::Vector3d& tr) {
    int votes = 0;
    const Eigen::Vector3d c2 = -r.transpose() * tr;
    for (std::size_t i = 0; i < x1.size(); ++i) {
      const Eigen::Vector3d d1 = x1[i].normalized();
      const Eigen::Vector3d d2 = (r.transpose() * x2[i]).normalized();
      const double b = d1.dot(d2);
      const double denom = 1.0 - b * b;
      if (denom < 1e-12) continue;  // near-parallel rays
      const double d = d1.dot(c2);
      const double f = d2.dot(c2);
      const double s = (d - b * f) / denom;
      const double u2 = (b * d - f) / denom;
      const Eigen::Vector3d p = 0.5 * (s * d1 + (c2 + u2 * d2));
      if (p.z() > 0.0 && (r * p + tr).z() > 0.0) ++votes;
    }
    return votes;
  };

  RelativePoseEstimate bestimate;
  int best_votes = -1;
  const Eigen::Matrix3d rots[2] = {r1, r2};
  const Eigen::Vector3d ts[2] = {t, -t};
  for (const auto& r : rots) {
    for (const auto& tr : ts) {
      const int votes = cheirality_votes(r, tr);
      if (votes > best_votes) {
        best_votes = votes;
        bestimate.rotation = r;
        bestimate.translation = tr;
      }
    }
  }
  if (best_votes <= 0) {
    throw EstimationError(
        "decompose_essential: no candidate passes the cheirality test");
  }
  return bestimate;
}

}  // namespace l2m
