// SPDX-License-Identifier: Apache-2.0
#include "l2m/warp/inpaint.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "l2m/io/image_io.hpp"

namespace l2m {

ImageRGB naive_inpaint(const ImageRGB& image, const RasterU8& mask,
                       const InpaintOptions& opts) {
  if (image.channels() != 3 || mask.width() != image.width() ||
      mask.height() != image.height()) {
    throw std::invalid_argument("naive_inpaint: image/mask mismatch");
  }
  const int w = image.width();
  const int h = image.height();

  std::vector<int> hole_x, hole_y;
  float known_sum[3] = {0, 0, 0};
  std::size_t known_count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y)) {
        hole_x.push_back(x);
        hole_y.push_back(y);
      } else {
        for (int c = 0; c < 3; ++c) known_sum[c] += image.at(x, y, c);
        ++known_count;
      }
    }
  }
  if (hole_x.empty()) return image;
  if (known_count == 0) {
    throw std::runtime_error("naive_inpaint: fully masked image");
  }

  ImageRGB cur = image;
  for (std::size_t i = 0; i < hole_x.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      cur.at(hole_x[i], hole_y[i], c) = known_sum[c] / known_count;
    }
  }

  // Jacobi sweeps over the hole list only; unmasked pixels never move.
  ImageRGB next = cur;
  static const int kDx[4] = {1, -1, 0, 0};
  static const int kDy[4] = {0, 0, 1, -1};
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    float max_change = 0.0f;
    for (std::size_t i = 0; i < hole_x.size(); ++i) {
      const int x = hole_x[i];
      const int y = hole_y[i];
      float acc[3] = {0, 0, 0};
      int n = 0;
      for (int j = 0; j < 4; ++j) {
        const int xx = x + kDx[j];
        const int yy = y + kDy[j];
        if (!cur.contains(xx, yy)) continue;
        for (int c = 0; c < 3; ++c) acc[c] += cur.at(xx, yy, c);
        ++n;
      }
      if (n == 0) continue;
      for (int c = 0; c < 3; ++c) {
        const float v = acc[c] / n;
        max_change = std::max(max_change, std::abs(v - cur.at(x, y, c)));
        next.at(x, y, c) = v;
      }
    }
    std::swap(cur, next);
    if (max_change < static_cast<float>(opts.tolerance)) break;
  }
  return cur;
}

namespace {

std::string substitute(const std::string& tmpl, const std::string& key,
                       const std::string& value) {
  std::string out = tmpl;
  const std::string token = "{" + key + "}";
  std::size_t pos = 0;
  while ((pos = out.find(token, pos)) != std::string::npos) {
    out.replace(pos, token.size(), value);
    pos += value.size();
  }
  return out;
}

std::filesystem::path make_scratch_dir() {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  std::ostringstream name;
  name << "l2m-inpaint-" << ::getpid() << "-" << counter++;
  const auto dir = base / name.str();
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

ImageRGB external_inpaint(const ImageRGB& image, const RasterU8& mask,
                          const std::string& command_template) {
  if (command_template.empty()) {
    throw InpaintHookError("external_inpaint: empty command template");
  }
  const auto dir = make_scratch_dir();
  const auto image_path = dir / "image.png";
  const auto mask_path = dir / "mask.png";
  const auto out_path = dir / "out.png";
  const auto err_path = dir / "stderr.txt";

  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};

  write_image_srgb(image_path, image);
  write_mask(mask_path, mask);

  std::string cmd = command_template;
  cmd = substitute(cmd, "image", image_path.string());
  cmd = substitute(cmd, "mask", mask_path.string());
  cmd = substitute(cmd, "out", out_path.string());
  cmd += " 2> " + err_path.string();

  const int status = std::system(cmd.c_str());

  auto read_stderr = [&]() {
    std::ifstream f(err_path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };

  if (status != 0) {
    throw InpaintHookError("external_inpaint: command exited with status " +
                           std::to_string(status) + "; stderr: " +
                           read_stderr());
  }
  if (!std::filesystem::exists(out_path)) {
    throw InpaintHookError("external_inpaint: command produced no output; "
                           "stderr: " + read_stderr());
  }
  ImageRGB result = read_image_linear(out_path);
  if (result.width() != image.width() || result.height() != image.height()) {
    throw InpaintHookError("external_inpaint: output dimensions mismatch");
  }
  return result;
}

}  // namespace l2m
