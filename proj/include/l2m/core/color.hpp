// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace l2m {

/// sRGB electro-optical transfer, c in [0, 1].
inline float srgb_to_linear(float c) {
  return c <= 0.04045f ? c / 12.92f : std::pow((c + 0.055f) / 1.055f, 2.4f);
}

inline float linear_to_srgb(float c) {
  c = std::clamp(c, 0.0f, 1.0f);
  return c <= 0.0031308f ? c * 12.92f
                         : 1.055f * std::pow(c, 1.0f / 2.4f) - 0.055f;
}

inline float u8_to_linear(std::uint8_t v) {
  return srgb_to_linear(static_cast<float>(v) / 255.0f);
}

inline std::uint8_t linear_to_u8(float v) {
  const float s = linear_to_srgb(v);
  return static_cast<std::uint8_t>(std::lround(s * 255.0f));
}

}  // namespace l2m
