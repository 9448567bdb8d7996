// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace l2m {

/// Pinhole intrinsics. Pixel coordinates are continuous; integer pixel
/// (x, y) samples the ray through exactly (u, v) = (x, y).
template <typename T>
struct Intrinsics {
  T fx = T(1);
  T fy = T(1);
  T cx = T(0);
  T cy = T(0);
  int width = 1;
  int height = 1;

  Intrinsics() = default;
  Intrinsics(T fx_, T fy_, T cx_, T cy_, int w, int h)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    if (!(fx > T(0)) || !(fy > T(0))) {
      throw std::invalid_argument("Intrinsics: focal lengths must be > 0");
    }
    if (w < 1 || h < 1) {
      throw std::invalid_argument("Intrinsics: image size must be >= 1");
    }
    if (!(cx >= T(0) && cx < T(w) && cy >= T(0) && cy < T(h))) {
      throw std::invalid_argument("Intrinsics: principal point out of image");
    }
  }

  template <typename U>
  Intrinsics<U> cast() const {
    return Intrinsics<U>(static_cast<U>(fx), static_cast<U>(fy),
                         static_cast<U>(cx), static_cast<U>(cy), width,
                         height);
  }

  Eigen::Matrix<T, 3, 3> matrix() const {
    Eigen::Matrix<T, 3, 3> k = Eigen::Matrix<T, 3, 3>::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    return k;
  }
};

using Intrinsicsd = Intrinsics<double>;
using Intrinsicsf = Intrinsics<float>;

/// Rigid world-to-camera transform: x_cam = q * x_world + t.
/// Camera frame is right-handed, +z forward, +x right, +y down.
template <typename T>
struct Pose {
  Eigen::Quaternion<T> q = Eigen::Quaternion<T>::Identity();
  Eigen::Matrix<T, 3, 1> t = Eigen::Matrix<T, 3, 1>::Zero();

  Pose() = default;
  Pose(const Eigen::Quaternion<T>& q_, const Eigen::Matrix<T, 3, 1>& t_)
      : q(q_), t(t_) {
    if (std::abs(q.norm() - T(1)) > T(1e-9)) {
      throw std::invalid_argument("Pose: quaternion must be unit-norm");
    }
  }

  static Pose identity() { return Pose(); }

  Eigen::Matrix<T, 3, 1> operator*(const Eigen::Matrix<T, 3, 1>& p) const {
    return q * p + t;
  }

  Eigen::Matrix<T, 3, 3> rotation() const { return q.toRotationMatrix(); }

  template <typename U>
  Pose<U> cast() const {
    Pose<U> out;
    out.q = q.template cast<U>().normalized();
    out.t = t.template cast<U>();
    return out;
  }
};

using Posed = Pose<double>;
using Posef = Pose<float>;

template <typename T>
Pose<T> inverse(const Pose<T>& p) {
  Pose<T> out;
  out.q = p.q.conjugate();
  out.t = -(out.q * p.t);
  return out;
}

/// Composition: (a * b) maps through b first, then a.
template <typename T>
Pose<T> compose(const Pose<T>& a, const Pose<T>& b) {
  Pose<T> out;
  out.q = (a.q * b.q).normalized();
  out.t = a.q * b.t + a.t;
  return out;
}

/// Transform taking camera-a coordinates to camera-b coordinates: b * a^-1.
template <typename T>
Pose<T> relative_pose(const Pose<T>& a, const Pose<T>& b) {
  return compose(b, inverse(a));
}

/// Projects a camera-space point. Returns (u, v, depth).
template <typename T>
Eigen::Matrix<T, 3, 1> project(const Eigen::Matrix<T, 3, 1>& point,
                               const Intrinsics<T>& k) {
  if (!(point.z() > T(0))) {
    throw std::domain_error("project: point depth must be > 0");
  }
  return {k.fx * point.x() / point.z() + k.cx,
          k.fy * point.y() / point.z() + k.cy, point.z()};
}

/// Back-projects pixel (u, v) at the given depth into camera space.
template <typename T>
Eigen::Matrix<T, 3, 1> unproject(T u, T v, T depth, const Intrinsics<T>& k) {
  if (!(depth > T(0))) {
    throw std::domain_error("unproject: depth must be > 0");
  }
  return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

template <typename T>
bool inside_image(T u, T v, const Intrinsics<T>& k) {
  return u >= T(0) && u <= T(k.width - 1) && v >= T(0) && v <= T(k.height - 1);
}

}  // namespace l2m
