// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "l2m/camera/camera.hpp"
#include "l2m/camera/sampling.hpp"
#include "l2m/core/rng.hpp"

using namespace l2m;

namespace {
const Intrinsicsd kTest(100.0, 100.0, 50.0, 50.0, 101, 101);
}

TEST_CASE("project maps the principal axis to the principal point") {
  const Eigen::Vector3d uvd = project<double>({0.0, 0.0, 2.0}, kTest);
  CHECK(uvd.x() == doctest::Approx(50.0));
  CHECK(uvd.y() == doctest::Approx(50.0));
  CHECK(uvd.z() == doctest::Approx(2.0));
}

TEST_CASE("project evaluates the pinhole formula") {
  const Eigen::Vector3d uvd = project<double>({1.0, 0.0, 1.0}, kTest);
  CHECK(uvd.x() == doctest::Approx(150.0));
  CHECK(uvd.y() == doctest::Approx(50.0));
  CHECK(uvd.z() == doctest::Approx(1.0));
}

TEST_CASE("project rejects non-positive depth") {
  CHECK_THROWS_AS(project<double>({0.0, 0.0, 0.0}, kTest), std::domain_error);
  CHECK_THROWS_AS(project<double>({0.0, 0.0, -1.0}, kTest), std::domain_error);
}

TEST_CASE("unproject evaluates the inverse formula") {
  const Eigen::Vector3d p = unproject<double>(50.0, 50.0, 1.0, kTest);
  CHECK(p.isApprox(Eigen::Vector3d(0.0, 0.0, 1.0)));
  const Eigen::Vector3d q = unproject<double>(150.0, 50.0, 2.0, kTest);
  CHECK(q.isApprox(Eigen::Vector3d(2.0, 0.0, 2.0)));
  CHECK_THROWS_AS(unproject<double>(0.0, 0.0, 0.0, kTest), std::domain_error);
}

TEST_CASE("project/unproject round-trip 1000 random points") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double z = uniform(rng, 0.1, 100.0);
    const Eigen::Vector3d p(uniform(rng, -3.0, 3.0) * z,
                            uniform(rng, -3.0, 3.0) * z, z);
    const Eigen::Vector3d uvd = project(p, kTest);
    const Eigen::Vector3d back = unproject(uvd.x(), uvd.y(), uvd.z(), kTest);
    CHECK((back - p).norm() < 1e-9);
  }
}

TEST_CASE("sample_intrinsics spans the configured range") {
  // Range endpoints: u * width at u = 0.58 and u = 0.88.
  CHECK(0.58 * 584 == doctest::Approx(338.72));
  CHECK(0.88 * 584 == doctest::Approx(513.92));
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Intrinsicsd k = sample_intrinsics(rng, 584, 584, 0.58, 0.88);
    CHECK(k.fx == k.fy);
    CHECK(k.fx >= 338.72);
    CHECK(k.fx <= 513.92);
    CHECK(k.cx == doctest::Approx(292.0));
    CHECK(k.width == 584);
  }
}

TEST_CASE("sample_intrinsics is deterministic and validates its range") {
  Rng a(99), b(99);
  const Intrinsicsd ka = sample_intrinsics(a, 640, 480, 0.58, 0.88);
  const Intrinsicsd kb = sample_intrinsics(b, 640, 480, 0.58, 0.88);
  CHECK(ka.fx == kb.fx);
  CHECK(ka.cy == kb.cy);
  Rng c(1);
  CHECK_THROWS_AS(sample_intrinsics(c, 640, 480, 0.0, 0.88),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_intrinsics(c, 640, 480, 0.9, 0.88),
                  std::invalid_argument);
}

TEST_CASE("sample_pose with zero ranges is the identity") {
  Rng rng(3);
  const Posed pose = sample_pose(rng, {0.0, 0.0}, 2.0);
  CHECK(pose.q.angularDistance(Eigen::Quaterniond::Identity()) < 1e-12);
  CHECK(pose.t.norm() == 0.0);
}

TEST_CASE("sample_pose output is unit-norm and deterministic") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    const Posed pa = sample_pose(a, {15.0, 0.15}, 3.0);
    const Posed pb = sample_pose(b, {15.0, 0.15}, 3.0);
    CHECK(std::abs(pa.q.norm() - 1.0) < 1e-9);
    CHECK(pa.q.coeffs() == pb.q.coeffs());
    CHECK(pa.t == pb.t);
  }
}

TEST_CASE("relative_pose identities and group law") {
  Rng rng(11);
  const Posed a = sample_pose(rng, {40.0, 0.5}, 2.0);
  const Posed b = sample_pose(rng, {40.0, 0.5}, 2.0);
  const Posed c = sample_pose(rng, {40.0, 0.5}, 2.0);

  const Posed self = relative_pose(a, a);
  CHECK(self.q.angularDistance(Eigen::Quaterniond::Identity()) < 1e-12);
  CHECK(self.t.norm() < 1e-12);

  const Posed from_identity = relative_pose(Posed::identity(), b);
  CHECK(from_identity.q.angularDistance(b.q) < 1e-12);
  CHECK((from_identity.t - b.t).norm() < 1e-12);

  const Posed ab = relative_pose(a, b);
  const Posed bc = relative_pose(b, c);
  const Posed ac = relative_pose(a, c);
  const Posed composed = compose(bc, ab);
  CHECK(composed.q.angularDistance(ac.q) < 1e-9);
  CHECK((composed.t - ac.t).norm() < 1e-9);
}

TEST_CASE("pose inverse composes to identity") {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const Posed p = sample_pose(rng, {90.0, 1.0}, 1.5);
    const Posed round = compose(inverse(p), p);
    CHECK(round.q.angularDistance(Eigen::Quaterniond::Identity()) < 1e-9);
    CHECK(round.t.norm() < 1e-9);
    const Eigen::Vector3d x(0.3, -0.2, 1.7);
    CHECK((inverse(p) * (p * x) - x).norm() < 1e-9);
  }
}

TEST_CASE("intrinsics invariants are enforced") {
  CHECK_THROWS_AS(Intrinsicsd(0.0, 1.0, 0.0, 0.0, 10, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(Intrinsicsd(1.0, 1.0, 10.0, 0.0, 10, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(Intrinsicsd(1.0, 1.0, 0.0, 0.0, 0, 10),
                  std::invalid_argument);
}
