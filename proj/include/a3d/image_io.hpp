#ifndef A3D_IMAGE_IO_HPP
#define A3D_IMAGE_IO_HPP

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "a3d/error.hpp"
#include "a3d/image.hpp"

namespace a3d {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

//! Decoded PNG: samples are stored as read (8 or 16 bit), without color
//! conversion beyond palette/low-bit-depth expansion and alpha stripping.
struct DecodedPng {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 0;  // 1 (gray) or 3 (rgb)
  int bit_depth = 0; // 8 or 16
  std::vector<std::uint16_t> samples;
};

inline DecodedPng decode_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) {
    throw Error(Errc::UnreadableInput, "cannot open '" + path.string() + "'");
  }
  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw Error(Errc::UnreadableInput, "'" + path.string() + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::UnreadableInput, "libpng initialization failed");
  }
  DecodedPng out;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::UnreadableInput, "corrupt PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const auto color_type = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (std::size_t r = 0; r < out.height; ++r) rows[r] = buffer.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (out.channels != 1 && out.channels != 3) {
    throw Error(Errc::UnreadableInput, "unsupported channel layout in '" + path.string() + "'");
  }
  const std::size_t count = out.width * out.height * static_cast<std::size_t>(out.channels);
  out.samples.resize(count);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      out.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = buffer[i];
  }
  return out;
}

inline void encode_png(const std::filesystem::path& path, std::size_t width,
                       std::size_t height, int color_type, int bit_depth,
                       const std::vector<png_byte>& buffer) {
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) {
    throw Error(Errc::WriteFailure, "cannot create '" + path.string() + "'");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::WriteFailure, "libpng initialization failed");
  }
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = width * static_cast<std::size_t>(channels) *
                               static_cast<std::size_t>(bit_depth / 8);
  std::vector<png_bytep> rows(height);
  for (std::size_t r = 0; r < height; ++r) {
    rows[r] = const_cast<png_bytep>(buffer.data() + r * rowbytes);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::WriteFailure, "failed writing '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

//! Reads an 8-bit RGB image. Gray inputs are replicated to three channels,
//! 16-bit inputs are reduced to their high byte.
inline Image read_png(const std::filesystem::path& path) {
  const auto png = detail::decode_png(path);
  Image img(png.width, png.height);
  auto bytes = img.bytes();
  const int shift = png.bit_depth == 16 ? 8 : 0;
  for (std::size_t i = 0; i < png.width * png.height; ++i) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const std::size_t src_ch = png.channels == 3 ? ch : 0;
      bytes[i * 3 + ch] = static_cast<std::uint8_t>(
          png.samples[i * static_cast<std::size_t>(png.channels) + src_ch] >> shift);
    }
  }
  return img;
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
  std::vector<png_byte> buffer(img.bytes().begin(), img.bytes().end());
  detail::encode_png(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, 8, buffer);
}

//! Reads a grayscale raster as raw sample values (0..255 or 0..65535).
//! RGB inputs are averaged across channels.
inline Grid<double> read_gray_png(const std::filesystem::path& path) {
  const auto png = detail::decode_png(path);
  Grid<double> out(png.width, png.height);
  auto values = out.values();
  for (std::size_t i = 0; i < png.width * png.height; ++i) {
    if (png.channels == 1) {
      values[i] = png.samples[i];
    } else {
      values[i] = (png.samples[3 * i] + png.samples[3 * i + 1] + png.samples[3 * i + 2]) / 3.0;
    }
  }
  return out;
}

//! Writes a grayscale PNG. Values are rounded and clamped to the bit depth.
inline void write_gray_png(const std::filesystem::path& path, const Grid<double>& values,
                           int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(Errc::InvalidValue, "gray PNG bit depth must be 8 or 16");
  }
  const double max = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t bytes_per = static_cast<std::size_t>(bit_depth / 8);
  std::vector<png_byte> buffer(values.width() * values.height() * bytes_per);
  const auto src = values.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(std::clamp(std::round(src[i]), 0.0, max));
    if (bit_depth == 16) {
      buffer[2 * i] = static_cast<png_byte>(v >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(v & 0xff);
    } else {
      buffer[i] = static_cast<png_byte>(v);
    }
  }
  detail::encode_png(path, values.width(), values.height(), PNG_COLOR_TYPE_GRAY, bit_depth, buffer);
}

//! Reads a single-channel PFM ("Pf"); rows are stored bottom-to-top on disk.
inline Grid<double> read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableInput, "cannot open '" + path.string() + "'");
  std::string magic;
  long long width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || (magic != "Pf" && magic != "PF") || width <= 0 || height <= 0 || scale == 0.0) {
    throw Error(Errc::UnreadableInput, "malformed PFM header in '" + path.string() + "'");
  }
  in.get();  // single whitespace after the scale
  const std::size_t channels = magic == "PF" ? 3 : 1;
  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  std::vector<unsigned char> raw(w * h * channels * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error(Errc::UnreadableInput, "truncated PFM data in '" + path.string() + "'");
  }
  const bool little = scale < 0.0;
  Grid<double> out(w, h);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double sum = 0.0;
      for (std::size_t ch = 0; ch < channels; ++ch) {
        const unsigned char* p = raw.data() + (((r * w) + c) * channels + ch) * 4;
        std::uint32_t bits = little ? (std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 |
                                       std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24)
                                    : (std::uint32_t{p[3]} | std::uint32_t{p[2]} << 8 |
                                       std::uint32_t{p[1]} << 16 | std::uint32_t{p[0]} << 24);
        sum += std::bit_cast<float>(bits);
      }
      out(h - 1 - r, c) = sum / static_cast<double>(channels);
    }
  }
  return out;
}

inline void write_pfm(const std::filesystem::path& path, const Grid<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::WriteFailure, "cannot create '" + path.string() + "'");
  out << "Pf\n" << values.width() << ' ' << values.height() << "\n-1.0\n";
  std::vector<unsigned char> raw(values.width() * values.height() * 4);
  std::size_t k = 0;
  for (std::size_t r = values.height(); r-- > 0;) {
    for (std::size_t c = 0; c < values.width(); ++c) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values(r, c)));
      for (int b = 0; b < 4; ++b) raw[k++] = static_cast<unsigned char>(bits >> (8 * b));
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error(Errc::WriteFailure, "failed writing '" + path.string() + "'");
}

}  // namespace a3d

#endif  // A3D_IMAGE_IO_HPP
