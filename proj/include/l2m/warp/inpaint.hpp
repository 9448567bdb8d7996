// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "l2m/core/raster.hpp"

namespace l2m {

struct InpaintOptions {
  double tolerance = 1e-4;  // max per-iteration change to call converged
  int max_iterations = 2000;
};

/// Diffusion fill: masked pixels (mask != 0) are repeatedly replaced by the
/// mean of their 4-neighbors until convergence. Unmasked pixels are returned
/// bit-exactly. Throws if everything is masked.
ImageRGB naive_inpaint(const ImageRGB& image, const RasterU8& mask,
                       const InpaintOptions& opts = {});

/// Raised when an external inpainting command cannot deliver a usable image.
struct InpaintHookError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs `command_template` with {image} {mask} {out} substituted by temp
/// file paths (image: 8-bit sRGB PNG; mask: 8-bit PNG, 255 = hole), then
/// reads the output back. Throws InpaintHookError on nonzero exit, missing
/// output, or a dimension mismatch; stderr is captured into the message.
ImageRGB external_inpaint(const ImageRGB& image, const RasterU8& mask,
                          const std::string& command_template);

}  // namespace l2m
