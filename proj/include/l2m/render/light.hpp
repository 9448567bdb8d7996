// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

#include "l2m/core/rng.hpp"

namespace l2m {

/// Point light in the world frame. Intensity is the unitless radiometric
/// scale that the renderer's exposure constant maps back to [0, 1].
struct PointLight {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double intensity = 1000.0;
  Eigen::Vector3f color = Eigen::Vector3f::Ones();
};

struct LightConfig {
  int count_min = 1;
  int count_max = 3;
  double intensity_min = 1000.0;
  double intensity_max = 3000.0;
  double color_min = 0.7;
  double color_max = 1.0;
};

/// Count uniform in [count_min, count_max], position uniform in the given
/// box, intensity and per-channel color uniform in their ranges.
/// Draw order per light: position (3), intensity (1), color (3).
inline std::vector<PointLight> sample_lights(
    Rng& rng, const LightConfig& cfg, const Eigen::Vector3d& box_center,
    const Eigen::Vector3d& box_half_extent) {
  if (cfg.count_min < 1 || cfg.count_max < cfg.count_min ||
      !(cfg.intensity_min > 0.0) || cfg.intensity_max < cfg.intensity_min ||
      cfg.color_min < 0.0 || cfg.color_max > 1.0 ||
      cfg.color_max < cfg.color_min) {
    throw std::invalid_argument("sample_lights: invalid config");
  }
  const int count =
      static_cast<int>(uniform_int(rng, cfg.count_min, cfg.count_max));
  std::vector<PointLight> lights(count);
  for (PointLight& light : lights) {
    for (int i = 0; i < 3; ++i) {
      light.position[i] = box_center[i] +
                          uniform(rng, -box_half_extent[i], box_half_extent[i]);
    }
    light.intensity = uniform(rng, cfg.intensity_min, cfg.intensity_max);
    for (int i = 0; i < 3; ++i) {
      light.color[i] =
          static_cast<float>(uniform(rng, cfg.color_min, cfg.color_max));
    }
  }
  return lights;
}

}  // namespace l2m
