// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "l2m/camera/sampling.hpp"
#include "l2m/eval/essential.hpp"
#include "l2m/eval/metrics.hpp"
#include "test_util.hpp"

using namespace l2m;

namespace {

/// Synthetic-projection oracle: random 3D points pushed through both
/// cameras give noiseless matches with known (R, t).
MatchSet project_matches(Rng& rng, const Posed& pose12, const Intrinsicsd& k1,
                         const Intrinsicsd& k2, int count) {
  MatchSet matches;
  matches.pairs.resize(count, 4);
  const Eigen::Matrix3d rot = pose12.rotation();
  int kept = 0;
  while (kept < count) {
    const double z = uniform(rng, 1.0, 6.0);
    const Eigen::Vector3d p1(uniform(rng, -1.0, 1.0) * z,
                             uniform(rng, -1.0, 1.0) * z, z);
    const Eigen::Vector3d p2 = rot * p1 + pose12.t;
    if (p2.z() <= 0.1) continue;
    const Eigen::Vector3d uv1 = project(p1, k1);
    const Eigen::Vector3d uv2 = project(p2, k2);
    if (!inside_image(uv1.x(), uv1.y(), k1) ||
        !inside_image(uv2.x(), uv2.y(), k2)) {
      continue;
    }
    matches.pairs.row(kept) << uv1.x(), uv1.y(), uv2.x(), uv2.y();
    ++kept;
  }
  return matches;
}

Eigen::Vector3d ray(const Intrinsicsd& k, double u, double v) {
  return {(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
}

WarpField constant_shift_warp(int w, int h, float dx, float dy) {
  WarpField warp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) warp.set(x, y, x + dx, y + dy);
  }
  return warp;
}

}  // namespace

TEST_CASE("endpoint error on exact and shifted predictions") {
  const int w = 16, h = 16;
  const WarpField gt = constant_shift_warp(w, h, 3.0f, 0.0f);
  CertaintyMap cert(w, h);
  cert.values.fill(1.0f);

  const EndpointStats exact = endpoint_error(gt, gt, cert);
  CHECK(exact.mean_epe == 0.0);
  CHECK(exact.pck.at(1.0) == 1.0);

  const WarpField shifted = constant_shift_warp(w, h, 3.0f, 2.0f);
  const EndpointStats off = endpoint_error(shifted, gt, cert);
  CHECK(off.mean_epe == doctest::Approx(2.0));
  CHECK(off.pck.at(1.0) == 0.0);
  CHECK(off.pck.at(3.0) == 1.0);

  CertaintyMap none(w, h);
  CHECK_THROWS(endpoint_error(gt, gt, none));
}

TEST_CASE("endpoint error agrees with a per-pixel oracle") {
  Rng rng(8);
  const int w = 24, h = 18;
  const WarpField gt = constant_shift_warp(w, h, 1.0f, -2.0f);
  WarpField pred(w, h);
  CertaintyMap cert(w, h);
  double sum = 0.0;
  int n = 0;
  int within1 = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (uniform01(rng) < 0.1) continue;  // leave some pixels invalid
      const float dx = static_cast<float>(uniform(rng, -2.0, 2.0));
      const float dy = static_cast<float>(uniform(rng, -2.0, 2.0));
      pred.set(x, y, gt.target.at(x, y, 0) + dx, gt.target.at(x, y, 1) + dy);
      const bool certain = uniform01(rng) < 0.8;
      cert.values.at(x, y) = certain ? 1.0f : 0.0f;
      if (certain) {
        // Recompute from the stored float values the implementation sees.
        const double ddx = static_cast<double>(pred.target.at(x, y, 0)) -
                           gt.target.at(x, y, 0);
        const double ddy = static_cast<double>(pred.target.at(x, y, 1)) -
                           gt.target.at(x, y, 1);
        const double epe = std::hypot(ddx, ddy);
        sum += epe;
        within1 += epe <= 1.0;
        ++n;
      }
    }
  }
  const EndpointStats stats = endpoint_error(pred, gt, cert);
  CHECK(stats.evaluated_pixels == static_cast<std::size_t>(n));
  CHECK(stats.mean_epe == doctest::Approx(sum / n).epsilon(1e-9));
  CHECK(stats.pck.at(1.0) ==
        doctest::Approx(static_cast<double>(within1) / n).epsilon(1e-9));
}

TEST_CASE("eight-point on pure x-translation recovers [t]x") {
  Rng rng(21);
  const Intrinsicsd k = testing::make_intrinsics(640, 480);
  Posed pose12;
  pose12.t = {1.0, 0.0, 0.0};
  const MatchSet matches = project_matches(rng, pose12, k, k, 60);
  const Eigen::Matrix3d e = estimate_essential_8pt(matches, k, k);
  // E ~ [t]x for R = I, t = x-hat, up to scale and sign.
  Eigen::Matrix3d expected;
  expected << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  expected *= std::sqrt(2.0) / expected.norm();  // ||E||_F = sqrt(2)
  const double err =
      std::min((e - expected).norm(), (e + expected).norm());
  CHECK(err < 1e-6);
}

TEST_CASE("essential matrix satisfies its algebraic identities") {
  Rng rng(22);
  const Intrinsicsd k = testing::make_intrinsics(640, 480);
  for (int trial = 0; trial < 10; ++trial) {
    const Posed pose12 = sample_pose(rng, {30.0, 0.4}, 2.0);
    const MatchSet matches = project_matches(rng, pose12, k, k, 50);
    const Eigen::Matrix3d e = estimate_essential_8pt(matches, k, k);

    CHECK(std::abs(e.determinant()) < 1e-8);
    const Eigen::Matrix3d identity_term =
        2.0 * e * e.transpose() * e - (e * e.transpose()).trace() * e;
    CHECK(identity_term.norm() < 1e-8);
    CHECK(e.norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // Noiseless matches: Sampson distance ~ 0 for every correspondence.
    for (Eigen::Index i = 0; i < matches.size(); ++i) {
      const double d2 = sampson_distance_sq(
          e, ray(k, matches.pairs(i, 0), matches.pairs(i, 1)),
          ray(k, matches.pairs(i, 2), matches.pairs(i, 3)));
      CHECK(std::sqrt(d2) < 1e-9);
    }
  }
}

TEST_CASE("eight-point rejects too few matches") {
  MatchSet tiny;
  tiny.pairs.resize(7, 4);
  tiny.pairs.setRandom();
  const Intrinsicsd k = testing::make_intrinsics(64, 64);
  CHECK_THROWS_AS(estimate_essential_8pt(tiny, k, k), EstimationError);
}

TEST_CASE("estimate is invariant to consistent coordinate scaling") {
  Rng rng(23);
  const Intrinsicsd k = testing::make_intrinsics(320, 240);
  const Posed pose12 = sample_pose(rng, {20.0, 0.3}, 2.0);
  const MatchSet matches = project_matches(rng, pose12, k, k, 40);
  const Eigen::Matrix3d e1 = estimate_essential_8pt(matches, k, k);

  MatchSet scaled;
  scaled.pairs = matches.pairs * 2.0;
  const Intrinsicsd k2(k.fx * 2, k.fy * 2, k.cx * 2, k.cy * 2, k.width * 2,
                       k.height * 2);
  const Eigen::Matrix3d e2 = estimate_essential_8pt(scaled, k2, k2);
  CHECK(std::min((e1 - e2).norm(), (e1 + e2).norm()) < 1e-9);
}

TEST_CASE("ransac keeps noiseless inliers and rejects planted outliers") {
  Rng rng(31);
  const Intrinsicsd k = testing::make_intrinsics(640, 480);
  RansacOptions opts;
  opts.threshold_px = 0.5;

  SUBCASE("all inliers") {
    const Posed pose12 = sample_pose(rng, {20.0, 0.3}, 2.0);
    const MatchSet matches = project_matches(rng, pose12, k, k, 100);
    Rng ransac_rng(1);
    const RansacResult result = ransac_essential(matches, k, k, opts, ransac_rng);
    CHECK(result.inlier_count == 100);
  }

  SUBCASE("80/20 with seeded outliers") {
    for (int trial = 0; trial < 10; ++trial) {
      const Posed pose12 = sample_pose(rng, {20.0, 0.3}, 2.0);
      MatchSet matches = project_matches(rng, pose12, k, k, 100);
      for (int i = 80; i < 100; ++i) {
        matches.pairs(i, 2) = uniform(rng, 0.0, 639.0);
        matches.pairs(i, 3) = uniform(rng, 0.0, 479.0);
      }
      Rng ransac_rng(1000 + trial);
      const RansacResult result =
          ransac_essential(matches, k, k, opts, ransac_rng);
      int true_in = 0, false_in = 0;
      for (int i = 0; i < 100; ++i) {
        if (i < 80) {
          true_in += result.inliers[i];
        } else {
          false_in += result.inliers[i];
        }
      }
      CHECK(true_in == 80);
      CHECK(false_in <= 1);  // >= 95% outlier rejection
    }
  }

  SUBCASE("determinism given the seed") {
    const Posed pose12 = sample_pose(rng, {20.0, 0.3}, 2.0);
    MatchSet matches = project_matches(rng, pose12, k, k, 60);
    for (int i = 50; i < 60; ++i) matches.pairs(i, 2) += 25.0;
    Rng r1(77), r2(77);
    const RansacResult a = ransac_essential(matches, k, k, opts, r1);
    const RansacResult b = ransac_essential(matches, k, k, opts, r2);
    CHECK(a.inliers == b.inliers);
    CHECK(a.essential == b.essential);
  }
}

TEST_CASE("decomposition recovers the synthetic pose") {
  Rng rng(41);
  const Intrinsicsd k = testing::make_intrinsics(640, 480);
  for (int trial = 0; trial < 10; ++trial) {
    const Posed pose12 = sample_pose(rng, {25.0, 0.4}, 2.0);
    if (pose12.t.norm() < 1e-3) continue;
    const MatchSet matches = project_matches(rng, pose12, k, k, 50);
    const Eigen::Matrix3d e = estimate_essential_8pt(matches, k, k);
    const RelativePoseEstimate estimate = decompose_essential(e, matches, k, k);

    const Eigen::Matrix3d r_gt = pose12.rotation();
    const Eigen::Matrix3d dr = estimate.rotation * r_gt.transpose();
    const double angle =
        std::acos(std::clamp((dr.trace() - 1.0) / 2.0, -1.0, 1.0));
    CHECK(angle < 1e-4);

    CHECK(estimate.translation.norm() == doctest::Approx(1.0).epsilon(1e-9));
    const Eigen::Vector3d t_gt = pose12.t.normalized();
    const double t_angle =
        std::acos(std::clamp(std::abs(estimate.translation.dot(t_gt)), 0.0, 1.0));
    CHECK(t_angle < 1e-4);
  }
}

TEST_CASE("pure translation decomposes to near-zero rotation") {
  Rng rng(43);
  const Intrinsicsd k = testing::make_intrinsics(640, 480);
  Posed pose12;
  pose12.t = {0.3, -0.1, 0.05};
  const MatchSet matches = project_matches(rng, pose12, k, k, 50);
  const Eigen::Matrix3d e = estimate_essential_8pt(matches, k, k);
  const RelativePoseEstimate estimate = decompose_essential(e, matches, k, k);
  const double angle = std::acos(
      std::clamp((estimate.rotation.trace() - 1.0) / 2.0, -1.0, 1.0));
  CHECK(angle * 180.0 / EIGEN_PI < 1e-4);
}

TEST_CASE("pose_error basics") {
  const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d tx(1.0, 0.0, 0.0);

  const PoseError exact = pose_error(identity, tx, identity, tx);
  CHECK(exact.rotation_deg == doctest::Approx(0.0));
  CHECK(exact.translation_deg == doctest::Approx(0.0));
  CHECK(exact.combined_deg == doctest::Approx(0.0));

  const Eigen::Matrix3d rot10 =
      Eigen::AngleAxisd(10.0 * EIGEN_PI / 180.0, Eigen::Vector3d::UnitZ())
          .toRotationMatrix();
  const PoseError r = pose_error(rot10, tx, identity, tx);
  CHECK(r.rotation_deg == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(r.combined_deg == doctest::Approx(10.0).epsilon(1e-9));

  const PoseError t = pose_error(identity, {0.0, 1.0, 0.0}, identity, tx);
  CHECK(t.translation_deg == doctest::Approx(90.0));

  // Sign-invariance: E only fixes t up to sign.
  const PoseError flipped = pose_error(identity, -tx, identity, tx);
  CHECK(flipped.translation_deg == doctest::Approx(0.0));

  // Degenerate ground truth translation.
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  CHECK(pose_error(identity, zero, identity, zero).translation_deg == 0.0);
  CHECK(pose_error(identity, tx, identity, zero).translation_deg == 180.0);
}

TEST_CASE("pose_auc exact step-function values") {
  CHECK(pose_auc({0.0, 0.0, 0.0}, {5.0, 10.0, 20.0}) ==
        std::vector<double>{100.0, 100.0, 100.0});
  const std::vector<double> single = pose_auc({2.5}, {5.0});
  CHECK(single[0] == doctest::Approx(50.0));
  const std::vector<double> with_failure =
      pose_auc({1.0, std::numeric_limits<double>::infinity()}, {5.0});
  CHECK(with_failure[0] == doctest::Approx(40.0));
  CHECK_THROWS(pose_auc({}, {5.0}));
  CHECK_THROWS(pose_auc({1.0}, {5.0, 3.0}));
}

TEST_CASE("pose_auc monotonicity under added successes and failures") {
  Rng rng(51);
  std::vector<double> errors;
  for (int i = 0; i < 30; ++i) errors.push_back(uniform(rng, 0.0, 30.0));
  const std::vector<double> thresholds = {5.0, 10.0, 20.0};
  const std::vector<double> base = pose_auc(errors, thresholds);

  std::vector<double> with_zero = errors;
  with_zero.push_back(0.0);
  const std::vector<double> better = pose_auc(with_zero, thresholds);
  std::vector<double> with_inf = errors;
  with_inf.push_back(std::numeric_limits<double>::infinity());
  const std::vector<double> worse = pose_auc(with_inf, thresholds);
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    CHECK(better[i] >= base[i]);
    CHECK(worse[i] <= base[i]);
  }
}

TEST_CASE("matches text round trip with comments and confidence") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "l2m_matches_test.txt";
  MatchSet matches;
  matches.pairs.resize(3, 4);
  matches.pairs << 1.5, 2.25, 3.0, 4.0, 10.0, 20.0, 30.0, 40.0, 0.0, 1.0, 2.0,
      3.5;
  matches.confidence.resize(3);
  matches.confidence << 0.9, 0.5, 1.0;
  write_matches(path, matches);
  const MatchSet back = read_matches(path);
  CHECK(back.pairs == matches.pairs);
  CHECK(back.confidence == matches.confidence);

  std::ofstream extra(path, std::ios::app);
  extra << "# trailing comment\n  \n5 6 7 8\n";
  extra.close();
  const MatchSet appended = read_matches(path);
  CHECK(appended.size() == 4);
  CHECK(appended.pairs(3, 0) == 5.0);
  fs::remove(path);
}
