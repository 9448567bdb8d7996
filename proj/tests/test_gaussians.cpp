// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "l2m/camera/sampling.hpp"
#include "l2m/gaussians/fit.hpp"
#include "l2m/gaussians/render.hpp"
#include "l2m/lift/lift.hpp"
#include "test_util.hpp"

using namespace l2m;

namespace {

Gaussian3D make_gaussian(const Eigen::Vector3d& mu, double scale,
                         double opacity, const Eigen::VectorXf& f) {
  Gaussian3D g;
  g.mu = mu;
  g.scale = Eigen::Vector3d::Constant(scale);
  g.opacity = opacity;
  g.feature = f;
  g.sh = Eigen::Vector3f(0.5f, 0.5f, 0.5f);
  return g;
}

Eigen::VectorXf feat1(float v) {
  Eigen::VectorXf f(1);
  f << v;
  return f;
}

std::vector<Gaussian3D> random_scene(Rng& rng, int count, int d) {
  std::vector<Gaussian3D> gaussians;
  for (int i = 0; i < count; ++i) {
    Gaussian3D g;
    const double z = uniform(rng, 1.0, 4.0);
    g.mu = {uniform(rng, -0.8, 0.8) * z, uniform(rng, -0.8, 0.8) * z, z};
    g.scale = {uniform(rng, 0.01, 0.15), uniform(rng, 0.01, 0.15),
               uniform(rng, 0.01, 0.15)};
    g.orientation =
        Eigen::Quaterniond(Eigen::AngleAxisd(uniform(rng, 0.0, 3.14),
                                             uniform_unit_vector(rng)));
    g.opacity = uniform(rng, 0.1, 1.0);
    g.feature.resize(d);
    for (int c = 0; c < d; ++c) {
      g.feature[c] = static_cast<float>(uniform(rng, 0.0, 1.0));
    }
    g.sh = Eigen::Vector3f::Constant(static_cast<float>(uniform(rng, 0.0, 1.0)));
    gaussians.push_back(g);
  }
  return gaussians;
}

/// Exhaustive per-pixel compositing with the same footprint predicate but
/// no tiling and no early termination.
Eigen::VectorXd composite_oracle(const std::vector<Gaussian3D>& gaussians,
                                 const Intrinsicsd& k, const Posed& pose,
                                 int px, int py, double* weight_sum) {
  struct Entry {
    double depth;
    std::size_t index;
    double alpha;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const SplatFootprint fp = project_gaussian(gaussians[i], k, pose);
    if (fp.culled) continue;
    const double rx = 3.0 * std::sqrt(fp.covariance(0, 0));
    const double ry = 3.0 * std::sqrt(fp.covariance(1, 1));
    if (px < std::ceil(fp.center.x() - rx) || px > std::floor(fp.center.x() + rx) ||
        py < std::ceil(fp.center.y() - ry) || py > std::floor(fp.center.y() + ry)) {
      continue;
    }
    const Eigen::Vector2d dx(px - fp.center.x(), py - fp.center.y());
    const double m = dx.dot(fp.covariance.inverse() * dx);
    if (m > 9.0) continue;
    entries.push_back({fp.depth, i, gaussians[i].opacity * std::exp(-0.5 * m)});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.depth != b.depth ? a.depth < b.depth : a.index < b.index;
  });
  const int d = gaussians.empty() ? 0 : static_cast<int>(gaussians[0].feature.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  double transmittance = 1.0;
  *weight_sum = 0.0;
  for (const Entry& e : entries) {
    const double w = e.alpha * transmittance;
    out += w * gaussians[e.index].feature.cast<double>();
    *weight_sum += w;
    transmittance *= 1.0 - e.alpha;
  }
  return out;
}

}  // namespace

TEST_CASE("init_gaussians_from_cloud strides and copies fields") {
  const Intrinsicsd k = testing::make_intrinsics(8, 8);
  const ImageRGB image = testing::make_test_image(8, 8);
  const DepthMap depth = testing::make_smooth_depth(8, 8);
  const PointCloud cloud = lift_to_pointcloud(image, depth, k);
  FeatureMap features(8, 8, 4);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      for (int c = 0; c < 4; ++c) {
        features.at(x, y, c) = static_cast<float>(x + 10 * y + 100 * c);
      }
    }
  }
  GaussianInitOptions opts;
  opts.stride = 1;
  opts.init_opacity = 0.7;
  const auto all = init_gaussians_from_cloud(cloud, features, k, opts);
  CHECK(all.size() == 64);
  opts.stride = 2;
  const auto sub = init_gaussians_from_cloud(cloud, features, k, opts);
  CHECK(sub.size() == 16);

  for (const Gaussian3D& g : sub) {
    const Eigen::Vector3d uvd = project(g.mu, k);
    const int px = static_cast<int>(std::lround(uvd.x()));
    const int py = static_cast<int>(std::lround(uvd.y()));
    CHECK(std::abs(uvd.x() - px) < 1e-6);
    CHECK(std::abs(uvd.y() - py) < 1e-6);
    CHECK(g.feature[0] == features.at(px, py, 0));
    CHECK(g.feature[3] == features.at(px, py, 3));
    CHECK(g.opacity == 0.7);
    CHECK(g.scale.x() == doctest::Approx(2.0 * g.mu.z() / k.fx));
  }

  const auto none = init_gaussians_from_cloud(PointCloud{}, features, k, opts);
  CHECK(none.empty());
}

TEST_CASE("on-axis footprint std is fx*s/z plus the regularizer") {
  const Intrinsicsd k = testing::make_intrinsics(64, 64);
  const double s = 0.05, z = 2.0;
  const Gaussian3D g = make_gaussian({0.0, 0.0, z}, s, 1.0, feat1(1.0f));
  const SplatFootprint fp = project_gaussian(g, k, Posed::identity());
  CHECK(!fp.culled);
  const double expected_var = std::pow(k.fx * s / z, 2.0);
  CHECK(fp.covariance(0, 0) == doctest::Approx(expected_var + 0.3).epsilon(1e-9));
  CHECK(fp.covariance(1, 1) == doctest::Approx(expected_var + 0.3).epsilon(1e-9));
  CHECK(std::abs(fp.covariance(0, 1)) < 1e-9);

  // Doubling the depth halves the pre-regularizer std.
  const Gaussian3D far_g = make_gaussian({0.0, 0.0, 2.0 * z}, s, 1.0, feat1(1.0f));
  const SplatFootprint far_fp = project_gaussian(far_g, k, Posed::identity());
  const double near_std = std::sqrt(fp.covariance(0, 0) - 0.3);
  const double far_std = std::sqrt(far_fp.covariance(0, 0) - 0.3);
  CHECK(far_std == doctest::Approx(near_std / 2.0).epsilon(1e-9));
}

TEST_CASE("anisotropic footprint equals the J Sigma J^T oracle") {
  const Intrinsicsd k = testing::make_intrinsics(64, 64);
  Gaussian3D g;
  g.mu = {0.4, -0.3, 2.5};
  g.scale = {0.2, 0.05, 0.01};
  g.orientation = Eigen::Quaterniond(
      Eigen::AngleAxisd(EIGEN_PI / 4.0, Eigen::Vector3d::UnitZ()));
  g.opacity = 1.0;
  g.feature = feat1(1.0f);
  Rng rng(9);
  const Posed pose = sample_pose(rng, {30.0, 0.2}, 2.0);
  const SplatFootprint fp = project_gaussian(g, k, pose);
  REQUIRE(!fp.culled);

  // Independent matrix chain with explicitly spelled-out factors.
  const Eigen::Matrix3d r_pose = pose.q.toRotationMatrix();
  const Eigen::Matrix3d r_g = g.orientation.toRotationMatrix();
  const Eigen::Matrix3d lambda =
      g.scale.array().square().matrix().asDiagonal();
  const Eigen::Matrix3d sigma_world = r_g * lambda * r_g.transpose();
  const Eigen::Matrix3d sigma_cam = r_pose * sigma_world * r_pose.transpose();
  const Eigen::Vector3d mu_cam = r_pose * g.mu + pose.t;
  Eigen::Matrix<double, 2, 3> jac;
  jac << k.fx / mu_cam.z(), 0.0, -k.fx * mu_cam.x() / (mu_cam.z() * mu_cam.z()),
      0.0, k.fy / mu_cam.z(), -k.fy * mu_cam.y() / (mu_cam.z() * mu_cam.z());
  const Eigen::Matrix2d expected =
      jac * sigma_cam * jac.transpose() + 0.3 * Eigen::Matrix2d::Identity();
  CHECK((fp.covariance - expected).norm() < 1e-9);

  const Gaussian3D behind = make_gaussian({0.0, 0.0, -1.0}, 0.1, 1.0, feat1(0.0f));
  CHECK(project_gaussian(behind, k, Posed::identity()).culled);
}

TEST_CASE("single opaque Gaussian renders its feature exactly at center") {
  const Intrinsicsd k = testing::make_intrinsics(33, 33);
  // Center the footprint exactly on pixel (16, 16).
  const Eigen::Vector3d mu = unproject<double>(16.0, 16.0, 2.0, k);
  Eigen::VectorXf f(3);
  f << 0.25f, -1.5f, 3.0f;
  const std::vector<Gaussian3D> scene = {make_gaussian(mu, 0.1, 1.0, f)};
  const FeatureRenderResult out = render_features(scene, k, Posed::identity(), 33, 33);
  CHECK(out.features.at(16, 16, 0) == 0.25f);
  CHECK(out.features.at(16, 16, 1) == -1.5f);
  CHECK(out.features.at(16, 16, 2) == 3.0f);
  CHECK(out.alpha.at(16, 16) == 1.0f);
  CHECK(out.color.at(16, 16, 0) == 0.5f);
}

TEST_CASE("front-over-back compositing follows the blending equation") {
  const Intrinsicsd k = testing::make_intrinsics(33, 33);
  const Eigen::Vector3d front = unproject<double>(16.0, 16.0, 1.0, k);
  const Eigen::Vector3d back = unproject<double>(16.0, 16.0, 2.0, k);
  const std::vector<Gaussian3D> scene = {
      make_gaussian(front, 0.05, 0.5, feat1(2.0f)),
      make_gaussian(back, 0.05, 1.0, feat1(0.0f)),
  };
  const FeatureRenderResult out = render_features(scene, k, Posed::identity(), 33, 33);
  // 2 * 0.5 + 0 * 1 * (1 - 0.5) = 1
  CHECK(out.features.at(16, 16, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.alpha.at(16, 16) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("renderer matches the exhaustive compositing oracle") {
  Rng rng(123);
  const Intrinsicsd k = testing::make_intrinsics(32, 32);
  for (int trial = 0; trial < 40; ++trial) {
    const auto scene = random_scene(rng, 25, 2);
    const FeatureRenderResult out =
        render_features(scene, k, Posed::identity(), 32, 32);
    for (int y = 0; y < 32; y += 3) {
      for (int x = 0; x < 32; x += 3) {
        double weight_sum;
        const Eigen::VectorXd expect =
            composite_oracle(scene, k, Posed::identity(), x, y, &weight_sum);
        CHECK(std::abs(out.features.at(x, y, 0) - expect[0]) < 1e-4);
        CHECK(std::abs(out.features.at(x, y, 1) - expect[1]) < 1e-4);
        CHECK(std::abs(out.alpha.at(x, y) - weight_sum) < 1e-4);
        CHECK(weight_sum >= 0.0);
        CHECK(weight_sum <= 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("rendered features are convex combinations with the background") {
  Rng rng(321);
  const Intrinsicsd k = testing::make_intrinsics(24, 24);
  const auto scene = random_scene(rng, 40, 1);
  float lo = 0.0f, hi = 0.0f;
  for (const auto& g : scene) {
    lo = std::min(lo, g.feature[0]);
    hi = std::max(hi, g.feature[0]);
  }
  const FeatureRenderResult out = render_features(scene, k, Posed::identity(), 24, 24);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) {
      CHECK(out.features.at(x, y, 0) >= lo - 1e-6f);
      CHECK(out.features.at(x, y, 0) <= hi + 1e-6f);
    }
  }
}

TEST_CASE("rendering is invariant to input order at distinct depths") {
  Rng rng(55);
  const Intrinsicsd k = testing::make_intrinsics(24, 24);
  auto scene = random_scene(rng, 30, 2);
  const FeatureRenderResult a = render_features(scene, k, Posed::identity(), 24, 24);
  std::reverse(scene.begin(), scene.end());
  const FeatureRenderResult b = render_features(scene, k, Posed::identity(), 24, 24);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) {
      for (int c = 0; c < 2; ++c) {
        CHECK(a.features.at(x, y, c) ==
              doctest::Approx(b.features.at(x, y, c)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("fitting a constant target through one opaque Gaussian") {
  // Single-pixel view so every nonzero compositing weight is exactly 1 and
  // the least-squares optimum is the plain average of the constant target.
  const Intrinsicsd k(10.0, 10.0, 0.0, 0.0, 1, 1);
  const Eigen::Vector3d mu(0.0, 0.0, 2.0);
  std::vector<Gaussian3D> scene = {make_gaussian(mu, 0.1, 1.0, feat1(0.0f))};
  FitTarget target;
  target.features = FeatureMap(1, 1, 1, 0.75f);
  target.k = k;
  target.pose = Posed::identity();
  const FitResult fit = fit_features(scene, {target});
  REQUIRE(fit.fitted[0] == 1);
  CHECK(fit.features(0, 0) == doctest::Approx(0.75).epsilon(1e-6));
  // One unknown, so CG converges in a single iteration.
  CHECK(fit.residual_history.size() <= 2);
  CHECK(fit.residual_history.back() < 1e-8);
  for (std::size_t i = 1; i < fit.residual_history.size(); ++i) {
    CHECK(fit.residual_history[i] <= fit.residual_history[i - 1]);
  }
}

TEST_CASE("constant target through a multi-pixel footprint lands at the "
          "least-squares optimum") {
  const Intrinsicsd k = testing::make_intrinsics(17, 17);
  const Eigen::Vector3d mu = unproject<double>(8.0, 8.0, 2.0, k);
  std::vector<Gaussian3D> scene = {make_gaussian(mu, 0.2, 1.0, feat1(0.0f))};
  FitTarget target;
  target.features = FeatureMap(17, 17, 1, 0.75f);
  target.k = k;
  target.pose = Posed::identity();
  const FitResult fit = fit_features(scene, {target});
  REQUIRE(fit.fitted[0] == 1);
  // Closed form for one unknown: f = c * sum(w) / sum(w^2).
  const Eigen::SparseMatrix<double> a =
      composite_weights(scene, k, Posed::identity(), 17, 17);
  double sum_w = 0.0, sum_w2 = 0.0;
  for (int outer = 0; outer < a.outerSize(); ++outer) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, outer); it; ++it) {
      sum_w += it.value();
      sum_w2 += it.value() * it.value();
    }
  }
  CHECK(fit.features(0, 0) ==
        doctest::Approx(0.75 * sum_w / sum_w2).epsilon(1e-6));
}

TEST_CASE("distillation recovers the features that rendered the targets") {
  Rng rng(99);
  const Intrinsicsd k = testing::make_intrinsics(64, 64);
  auto scene = random_scene(rng, 120, 3);
  for (auto& g : scene) g.opacity = std::max(g.opacity, 0.4);

  // Ground-truth features rendered from three viewpoints.
  std::vector<Posed> poses = {Posed::identity(),
                              sample_pose(rng, {10.0, 0.05}, 2.0),
                              sample_pose(rng, {10.0, 0.05}, 2.0)};
  std::vector<FitTarget> targets;
  for (const Posed& pose : poses) {
    FitTarget t;
    t.features = render_features(scene, k, pose, 64, 64).features;
    t.k = k;
    t.pose = pose;
    targets.push_back(std::move(t));
  }

  // Start from scratched features and fit back.
  auto scratched = scene;
  for (auto& g : scratched) g.feature.setZero();
  FitOptions opts;
  opts.max_iterations = 400;
  opts.tolerance = 1e-10;
  const FitResult fit = fit_features(scratched, targets, opts);

  for (std::size_t i = 1; i < fit.residual_history.size(); ++i) {
    CHECK(fit.residual_history[i] <= fit.residual_history[i - 1]);
  }
  int recovered = 0, fitted = 0;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (!fit.fitted[i]) continue;
    ++fitted;
    bool ok = true;
    for (int c = 0; c < 3; ++c) {
      ok &= std::abs(fit.features(i, c) - scene[i].feature[c]) < 1e-4;
    }
    recovered += ok;
  }
  // Every Gaussian with usable coverage must come back; a few can sit in
  // ill-conditioned stacks, so require near-total recovery.
  CHECK(fitted >= 100);
  CHECK(recovered >= fitted * 95 / 100);

  // Rendered maps from the fitted features must match the targets tightly.
  auto refit = scratched;
  FitResult applied = fit;
  apply_features(refit, applied);
  const FeatureMap rerender =
      render_features(refit, k, poses[0], 64, 64).features;
  RasterU8 all(64, 64, 1, 1);
  CHECK(feature_l1_loss(rerender, targets[0].features, all) < 1e-5);
}

TEST_CASE("never-visible Gaussians are flagged and left untouched") {
  const Intrinsicsd k = testing::make_intrinsics(17, 17);
  const Eigen::Vector3d mu = unproject<double>(8.0, 8.0, 2.0, k);
  std::vector<Gaussian3D> scene = {
      make_gaussian(mu, 0.2, 1.0, feat1(0.0f)),
      make_gaussian({0.0, 0.0, -3.0}, 0.2, 1.0, feat1(42.0f)),  // behind
  };
  FitTarget target;
  target.features = FeatureMap(17, 17, 1, 0.5f);
  target.k = k;
  target.pose = Posed::identity();
  const FitResult fit = fit_features(scene, {target});
  CHECK(fit.fitted[0] == 1);
  CHECK(fit.fitted[1] == 0);
  CHECK(fit.features(1, 0) == 42.0f);
}

TEST_CASE("feature_l1_loss basics") {
  FeatureMap a(4, 4, 2, 0.5f);
  FeatureMap b(4, 4, 2, 1.0f);
  RasterU8 mask(4, 4, 1, 1);
  CHECK(feature_l1_loss(a, a, mask) == 0.0);
  CHECK(feature_l1_loss(a, b, mask) == doctest::Approx(0.5));
  CHECK(feature_l1_loss(a, b, mask) == feature_l1_loss(b, a, mask));
  RasterU8 empty(4, 4, 1, 0);
  CHECK_THROWS_AS(feature_l1_loss(a, b, empty), std::invalid_argument);
}
