// SPDX-License-Identifier: Apache-2.0
#include "l2m/io/image_io.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "l2m/core/color.hpp"

namespace l2m {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

void read_png_raw(const std::filesystem::path& path, int bit_depth_wanted,
                  RasterU8* out8, RasterU16* out16) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) fail(path, "cannot open");

  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  if (!r.png) fail(path, "png_create_read_struct failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) fail(path, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(r.png))) fail(path, "libpng read error");

  png_init_io(r.png, fp.get());
  png_read_info(r.png, r.info);

  const int bit_depth = png_get_bit_depth(r.png, r.info);
  const int color_type = png_get_color_type(r.png, r.info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(r.png);
  }
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
  png_set_strip_alpha(r.png);

  if (bit_depth_wanted == 8) {
    if (bit_depth == 16) png_set_strip_16(r.png);
  } else {
    if (bit_depth != 16) fail(path, "expected a 16-bit PNG");
    if (color_type != PNG_COLOR_TYPE_GRAY) {
      fail(path, "expected grayscale for 16-bit depth PNG");
    }
    png_set_swap(r.png);  // libpng hands big-endian rows by default
  }

  png_read_update_info(r.png, r.info);
  const int w = static_cast<int>(png_get_image_width(r.png, r.info));
  const int h = static_cast<int>(png_get_image_height(r.png, r.info));
  const int channels = png_get_channels(r.png, r.info);

  std::vector<png_bytep> rows(h);
  if (bit_depth_wanted == 8) {
    *out8 = RasterU8(w, h, channels);
    for (int y = 0; y < h; ++y) {
      rows[y] = reinterpret_cast<png_bytep>(&out8->at(0, y, 0));
    }
  } else {
    if (channels != 1) fail(path, "expected single channel");
    *out16 = RasterU16(w, h, 1);
    for (int y = 0; y < h; ++y) {
      rows[y] = reinterpret_cast<png_bytep>(&out16->at(0, y, 0));
    }
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
}

}  // namespace

RasterU8 read_png(const std::filesystem::path& path) {
  RasterU8 out;
  read_png_raw(path, 8, &out, nullptr);
  return out;
}

RasterU16 read_png16(const std::filesystem::path& path) {
  RasterU16 out;
  read_png_raw(path, 16, nullptr, &out);
  return out;
}

void write_png(const std::filesystem::path& path, const RasterU8& image) {
  if (image.empty()) throw std::invalid_argument("write_png: empty image");
  int color_type;
  switch (image.channels()) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
    default: throw std::invalid_argument("write_png: unsupported channels");
  }
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) fail(path, "cannot open for write");

  PngWriter wtr;
  wtr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
  if (!wtr.png) fail(path, "png_create_write_struct failed");
  wtr.info = png_create_info_struct(wtr.png);
  if (!wtr.info) fail(path, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(wtr.png))) fail(path, "libpng write error");

  png_init_io(wtr.png, fp.get());
  png_set_IHDR(wtr.png, wtr.info, image.width(), image.height(), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wtr.png, wtr.info);
  std::vector<png_const_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y) {
    rows[y] = reinterpret_cast<png_const_bytep>(&image.at(0, y, 0));
  }
  png_write_image(wtr.png, const_cast<png_bytepp>(rows.data()));
  png_write_end(wtr.png, nullptr);
}

void write_png16(const std::filesystem::path& path, const RasterU16& image) {
  if (image.channels() != 1) {
    throw std::invalid_argument("write_png16: expected single channel");
  }
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) fail(path, "cannot open for write");

  PngWriter wtr;
  wtr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
  if (!wtr.png) fail(path, "png_create_write_struct failed");
  wtr.info = png_create_info_struct(wtr.png);
  if (!wtr.info) fail(path, "png_create_info_struct failed");
  if (setjmp(png_jmpbuf(wtr.png))) fail(path, "libpng write error");

  png_init_io(wtr.png, fp.get());
  png_set_IHDR(wtr.png, wtr.info, image.width(), image.height(), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wtr.png, wtr.info);
  png_set_swap(wtr.png);
  std::vector<png_const_bytep> rows(image.height());
  for (int y = 0; y < image.height(); ++y) {
    rows[y] = reinterpret_cast<png_const_bytep>(&image.at(0, y, 0));
  }
  png_write_image(wtr.png, const_cast<png_bytepp>(rows.data()));
  png_write_end(wtr.png, nullptr);
}

RasterF read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::string magic;
  in >> magic;
  if (magic != "Pf") fail(path, "not a grayscale PFM (magic 'Pf')");
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  if (!in || w < 1 || h < 1 || scale == 0.0) fail(path, "malformed PFM header");
  in.get();  // single whitespace byte after the scale

  const bool file_little = scale < 0.0;
  RasterF out(w, h, 1);
  std::vector<float> row(w);
  // PFM rows are stored bottom-up.
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(w) * sizeof(float));
    if (!in) fail(path, "truncated PFM data");
    if (file_little != (std::endian::native == std::endian::little)) {
      for (float& v : row) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        bits = __builtin_bswap32(bits);
        std::memcpy(&v, &bits, 4);
      }
    }
    std::memcpy(&out.at(0, y, 0), row.data(),
                static_cast<std::size_t>(w) * sizeof(float));
  }
  return out;
}

void write_pfm(const std::filesystem::path& path, const RasterF& image) {
  if (image.channels() != 1) {
    throw std::invalid_argument("write_pfm: expected single channel");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for write");
  const double scale =
      std::endian::native == std::endian::little ? -1.0 : 1.0;
  out << "Pf\n" << image.width() << " " << image.height() << "\n" << scale
      << "\n";
  for (int y = image.height() - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(&image.at(0, y, 0)),
              static_cast<std::streamsize>(image.width()) * sizeof(float));
  }
  if (!out) fail(path, "short write");
}

ImageRGB read_image_linear(const std::filesystem::path& path) {
  const RasterU8 raw = read_png(path);
  ImageRGB out(raw.width(), raw.height(), 3);
  for (int y = 0; y < raw.height(); ++y) {
    for (int x = 0; x < raw.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const int src = raw.channels() == 1 ? 0 : c;
        out.at(x, y, c) = u8_to_linear(raw.at(x, y, src));
      }
    }
  }
  return out;
}

void write_image_srgb(const std::filesystem::path& path,
                      const ImageRGB& image) {
  RasterU8 raw(image.width(), image.height(), 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        raw.at(x, y, c) = linear_to_u8(image.at(x, y, c));
      }
    }
  }
  write_png(path, raw);
}

DepthMap read_depth(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pfm" || ext == ".PFM") {
    const RasterF raw = read_pfm(path);
    DepthMap depth(raw.width(), raw.height());
    for (int y = 0; y < raw.height(); ++y) {
      for (int x = 0; x < raw.width(); ++x) depth.set(x, y, raw.at(x, y));
    }
    return depth;
  }
  if (ext == ".png" || ext == ".PNG") {
    const RasterU16 raw = read_png16(path);
    DepthMap depth(raw.width(), raw.height());
    for (int y = 0; y < raw.height(); ++y) {
      for (int x = 0; x < raw.width(); ++x) {
        depth.set(x, y, static_cast<float>(raw.at(x, y)) / 1000.0f);
      }
    }
    return depth;
  }
  fail(path, "unsupported depth format (want .pfm or 16-bit .png)");
}

void write_depth_pfm(const std::filesystem::path& path,
                     const DepthMap& depth) {
  RasterF raw(depth.width(), depth.height(), 1, 0.0f);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      raw.at(x, y) = depth.is_valid(x, y) ? depth.depth(x, y) : 0.0f;
    }
  }
  write_pfm(path, raw);
}

RasterU8 read_mask(const std::filesystem::path& path) {
  const RasterU8 raw = read_png(path);
  RasterU8 mask(raw.width(), raw.height(), 1, 0);
  for (int y = 0; y < raw.height(); ++y) {
    for (int x = 0; x < raw.width(); ++x) {
      mask.at(x, y) = raw.at(x, y, 0) >= 128 ? 1 : 0;
    }
  }
  return mask;
}

void write_mask(const std::filesystem::path& path, const RasterU8& mask01) {
  RasterU8 raw(mask01.width(), mask01.height(), 1, 0);
  for (std::size_t i = 0; i < mask01.size(); ++i) {
    raw.data()[i] = mask01.data()[i] ? 255 : 0;
  }
  write_png(path, raw);
}

}  // namespace l2m
