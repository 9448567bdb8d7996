// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "l2m/camera/sampling.hpp"
#include "l2m/render/light.hpp"
#include "l2m/render/rasterize.hpp"

namespace l2m {

struct GaussianConfig {
  int stride = 2;
  double init_opacity = 0.8;
  int feature_dim = 16;
  int fit_max_iterations = 200;
  double fit_tolerance = 1e-8;
};

/// Generation settings. Every sampled range the pipeline draws from lives
/// here; file values (TOML or JSON) override the defaults, CLI flags
/// override the file.
struct GenConfig {
  int width = 584;
  int height = 584;
  double focal_min = 0.58;   // fraction of image width
  double focal_max = 0.88;
  int views_per_image = 9;   // multiview sets; pairs always make one pair
  std::uint64_t seed = 0;

  PoseRanges pose;
  double depth_scale_min = 0.75;  // log-uniform
  double depth_scale_max = 1.33;
  double depth_shift_frac = 0.05; // +- fraction of median depth

  double discontinuity_ratio = 0.1;
  double occlusion_tolerance = 0.02;
  int splat_radius = 1;
  int closing_radius = 1;
  double min_covisibility = 0.3;

  Shading shading = Shading::kLit;
  double ambient = 0.1;
  double exposure = 1.0 / 3000.0;

  LightConfig lights;
  double light_box_scale = 1.0;  // box half-extent, units of median depth

  bool lock_camera2_to_source = false;
  bool identity_first_view = true;

  std::string inpaint_cmd;   // empty = built-in diffusion fill
  int inpaint_max_iterations = 2000;

  GaussianConfig gaussians;

  void validate() const;
};

/// Reads .json (strict JSON) or .toml/anything else (flat TOML subset:
/// sections, scalars, arrays, comments). Unknown keys are an error.
GenConfig load_config(const std::filesystem::path& path);

/// Applies one "key=value" override with config-file key names.
void apply_config_override(GenConfig& cfg, const std::string& key,
                           const std::string& value);

}  // namespace l2m
