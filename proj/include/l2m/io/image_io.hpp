// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "l2m/core/raster.hpp"
#include "l2m/lift/depth_map.hpp"

namespace l2m {

/// 8-bit PNG, any of gray/gray+alpha/RGB/RGBA collapsed to the returned
/// channel count (1 or 3). 16-bit files are downshifted; use read_png16 for
/// full precision.
RasterU8 read_png(const std::filesystem::path& path);

/// 16-bit grayscale PNG (millimeter depth convention).
RasterU16 read_png16(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RasterU8& image);
void write_png16(const std::filesystem::path& path, const RasterU16& image);

/// PFM "Pf" grayscale float32: scale sign encodes endianness, rows stored
/// bottom-up.
RasterF read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const RasterF& image);

/// Linear-RGB <-> 8-bit sRGB PNG.
ImageRGB read_image_linear(const std::filesystem::path& path);
void write_image_srgb(const std::filesystem::path& path, const ImageRGB& image);

/// Depth ingest: .pfm float meters, or 16-bit grayscale PNG millimeters.
/// Non-positive or non-finite entries become invalid pixels.
DepthMap read_depth(const std::filesystem::path& path);
void write_depth_pfm(const std::filesystem::path& path, const DepthMap& depth);

/// 8-bit mask PNG, 255 = set.
RasterU8 read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const RasterU8& mask01);

}  // namespace l2m
