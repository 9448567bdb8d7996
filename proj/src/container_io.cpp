// SPDX-License-Identifier: Apache-2.0
#include "l2m/io/container_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace l2m {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
      static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::istream& in) {
  const std::uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void put_f32_block(std::ostream& out, const float* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(float)));
  } else {
    for (std::size_t i = 0; i < count; ++i) put_f32(out, data[i]);
  }
}

void get_f32_block(std::istream& in, float* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(count * sizeof(float)));
  } else {
    for (std::size_t i = 0; i < count; ++i) data[i] = get_f32(in);
  }
}

void check_magic(std::istream& in, const char expected[4],
                 const std::filesystem::path& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, expected, 4) != 0) {
    fail(path, std::string("bad magic, expected ") +
                   std::string(expected, 4));
  }
  char version;
  in.get(version);
  if (version != 1) fail(path, "unsupported container version");
}

}  // namespace

void write_warp(const std::filesystem::path& path, const WarpField& warp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for write");
  out.write("L2MW", 4);
  out.put(1);
  put_u32(out, static_cast<std::uint32_t>(warp.width()));
  put_u32(out, static_cast<std::uint32_t>(warp.height()));
  put_f32_block(out, warp.target.data(), warp.target.size());
  if (!out) fail(path, "short write");
}

WarpField read_warp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  check_magic(in, "L2MW", path);
  const std::uint32_t w = get_u32(in);
  const std::uint32_t h = get_u32(in);
  if (!in || w == 0 || h == 0) fail(path, "malformed warp header");
  WarpField warp(static_cast<int>(w), static_cast<int>(h));
  get_f32_block(in, warp.target.data(), warp.target.size());
  if (!in) fail(path, "truncated warp data");
  return warp;
}

void write_feature_map(const std::filesystem::path& path,
                       const FeatureMap& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for write");
  out.write("L2MF", 4);
  out.put(1);
  put_u32(out, static_cast<std::uint32_t>(features.height()));
  put_u32(out, static_cast<std::uint32_t>(features.width()));
  put_u32(out, static_cast<std::uint32_t>(features.channels()));
  put_f32_block(out, features.data(), features.size());
  if (!out) fail(path, "short write");
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  check_magic(in, "L2MF", path);
  const std::uint32_t h = get_u32(in);
  const std::uint32_t w = get_u32(in);
  const std::uint32_t c = get_u32(in);
  if (!in || w == 0 || h == 0 || c == 0) fail(path, "malformed feature header");
  FeatureMap features(static_cast<int>(w), static_cast<int>(h),
                      static_cast<int>(c));
  get_f32_block(in, features.data(), features.size());
  if (!in) fail(path, "truncated feature data");
  return features;
}

void write_gaussians(const std::filesystem::path& path,
                     const std::vector<Gaussian3D>& gaussians) {
  const std::uint32_t d =
      gaussians.empty() ? 0
                        : static_cast<std::uint32_t>(gaussians[0].feature.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for write");
  out.write("L2MG", 4);
  out.put(1);
  put_u32(out, static_cast<std::uint32_t>(gaussians.size()));
  put_u32(out, d);
  for (const Gaussian3D& g : gaussians) {
    if (static_cast<std::uint32_t>(g.feature.size()) != d) {
      fail(path, "inconsistent feature dimension across Gaussians");
    }
    for (int i = 0; i < 3; ++i) put_f32(out, static_cast<float>(g.mu[i]));
    for (int i = 0; i < 3; ++i) put_f32(out, static_cast<float>(g.scale[i]));
    put_f32(out, static_cast<float>(g.orientation.w()));
    put_f32(out, static_cast<float>(g.orientation.x()));
    put_f32(out, static_cast<float>(g.orientation.y()));
    put_f32(out, static_cast<float>(g.orientation.z()));
    put_f32(out, static_cast<float>(g.opacity));
    for (int i = 0; i < 3; ++i) put_f32(out, g.sh[i]);
    put_f32_block(out, g.feature.data(), g.feature.size());
  }
  if (!out) fail(path, "short write");
}

std::vector<Gaussian3D> read_gaussians(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  check_magic(in, "L2MG", path);
  const std::uint32_t count = get_u32(in);
  const std::uint32_t d = get_u32(in);
  if (!in) fail(path, "malformed splat header");
  std::vector<Gaussian3D> gaussians(count);
  for (Gaussian3D& g : gaussians) {
    for (int i = 0; i < 3; ++i) g.mu[i] = get_f32(in);
    for (int i = 0; i < 3; ++i) g.scale[i] = get_f32(in);
    float q[4];
    for (float& v : q) v = get_f32(in);
    g.orientation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized();
    g.opacity = get_f32(in);
    for (int i = 0; i < 3; ++i) g.sh[i] = get_f32(in);
    g.feature.resize(d);
    get_f32_block(in, g.feature.data(), d);
    if (!in) fail(path, "truncated splat data");
  }
  return gaussians;
}

}  // namespace l2m
