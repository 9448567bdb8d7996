// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "l2m/gaussians/gaussian.hpp"
#include "l2m/warp/warp_field.hpp"

namespace l2m {

// Binary containers, all little-endian on disk.
//
//   warp    "L2MW" | u8 version=1 | u32 width | u32 height
//           | w*h float32 (x, y) pairs, NaN pair = invalid
//   feature "L2MF" | u8 version=1 | u32 height | u32 width | u32 channels
//           | h*w*c float32, row-major
//   splats  "L2MG" | u8 version=1 | u32 count | u32 d
//           | per Gaussian: mu[3] scale[3] quat[wxyz] opacity sh[3] f[d]

WarpField read_warp(const std::filesystem::path& path);
void write_warp(const std::filesystem::path& path, const WarpField& warp);

FeatureMap read_feature_map(const std::filesystem::path& path);
void write_feature_map(const std::filesystem::path& path,
                       const FeatureMap& features);

std::vector<Gaussian3D> read_gaussians(const std::filesystem::path& path);
void write_gaussians(const std::filesystem::path& path,
                     const std::vector<Gaussian3D>& gaussians);

}  // namespace l2m
