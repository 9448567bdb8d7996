// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace l2m {

/// Dense raster with interleaved channels, row-major pixel order.
/// Pixel (x, y) occupies data()[(y * width + x) * channels + c].
template <typename Scalar>
class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, int channels, Scalar fill = Scalar(0)) {
    if (width < 1 || height < 1 || channels < 1) {
      throw std::invalid_argument("Raster: dimensions must be positive");
    }
    width_ = width;
    height_ = height;
    channels_ = channels;
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  std::size_t size() const { return data_.size(); }

  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  bool same_shape(const Raster& o) const {
    return width_ == o.width_ && height_ == o.height_ &&
           channels_ == o.channels_;
  }

  Scalar& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const Scalar& at(int x, int y, int c = 0) const {
    return data_[index(x, y, c)];
  }

  /// View of one pixel's channel vector.
  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> pixel(int x, int y) {
    return {data_.data() + index(x, y, 0), channels_};
  }
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> pixel(
      int x, int y) const {
    return {data_.data() + index(x, y, 0), channels_};
  }

  /// View of the whole raster as a (pixels x channels) row-major matrix.
  Eigen::Map<
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  as_matrix() {
    return {data_.data(), static_cast<Eigen::Index>(pixel_count()), channels_};
  }
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
  as_matrix() const {
    return {data_.data(), static_cast<Eigen::Index>(pixel_count()), channels_};
  }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  void fill(Scalar v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ &&
           a.channels_ == b.channels_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<Scalar> data_;
};

using RasterF = Raster<float>;
using RasterU8 = Raster<std::uint8_t>;
using RasterU16 = Raster<std::uint16_t>;

/// Linear-light RGB image, channels == 3, values nominally in [0, 1].
using ImageRGB = RasterF;

}  // namespace l2m
