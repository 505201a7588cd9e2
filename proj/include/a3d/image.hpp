#ifndef A3D_IMAGE_HPP
#define A3D_IMAGE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "a3d/error.hpp"
#include "a3d/parallel.hpp"

namespace a3d {

//! Dense row-major 2D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) {
    return data_[row * width_ + col];
  }
  const T& operator()(std::size_t row, std::size_t col) const {
    return data_[row * width_ + col];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using Rgb = std::array<std::uint8_t, 3>;

//! 8-bit, 3-channel, row-major interleaved RGB raster.
class Image {
 public:
  static constexpr std::size_t kChannels = 3;

  Image() = default;
  Image(std::size_t width, std::size_t height, Rgb fill = {0, 0, 0})
      : width_(width), height_(height), pixels_(width * height * kChannels) {
    for (std::size_t i = 0; i < width * height; ++i) {
      std::copy(fill.begin(), fill.end(), pixels_.begin() + i * kChannels);
    }
  }
  //! Adopts an interleaved RGB buffer of exactly width * height * 3 bytes.
  static Image from_bytes(std::size_t width, std::size_t height,
                          std::vector<std::uint8_t> pixels) {
    if (pixels.size() != width * height * kChannels) {
      throw Error(Errc::DimensionMismatch,
                  "pixel buffer of " + std::to_string(pixels.size()) +
                      " bytes does not match " + std::to_string(width) + "x" +
                      std::to_string(height) + "x3");
    }
    Image img;
    img.width_ = width;
    img.height_ = height;
    img.pixels_ = std::move(pixels);
    return img;
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t* pixel(std::size_t row, std::size_t col) {
    return pixels_.data() + (row * width_ + col) * kChannels;
  }
  const std::uint8_t* pixel(std::size_t row, std::size_t col) const {
    return pixels_.data() + (row * width_ + col) * kChannels;
  }
  Rgb at(std::size_t row, std::size_t col) const {
    const auto* p = pixel(row, col);
    return {p[0], p[1], p[2]};
  }
  void set(std::size_t row, std::size_t col, Rgb value) {
    std::copy(value.begin(), value.end(), pixel(row, col));
  }

  std::span<std::uint8_t> bytes() noexcept { return pixels_; }
  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

//! Destination-indexed source coordinates: output(r, c) samples the source at
//! column src_x(r, c) and row src_y(r, c).
struct CoordMap {
  Grid<double> src_x;
  Grid<double> src_y;

  CoordMap() = default;
  CoordMap(std::size_t width, std::size_t height)
      : src_x(width, height), src_y(width, height) {}

  std::size_t width() const noexcept { return src_x.width(); }
  std::size_t height() const noexcept { return src_x.height(); }

  static CoordMap identity(std::size_t width, std::size_t height) {
    CoordMap map(width, height);
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        map.src_x(r, c) = static_cast<double>(c);
        map.src_y(r, c) = static_cast<double>(r);
      }
    }
    return map;
  }
};

struct BorderPolicy {
  struct Replicate {};
  struct Constant {
    Rgb fill{0, 0, 0};
  };
  std::variant<Replicate, Constant> mode = Replicate{};

  static BorderPolicy replicate() { return {Replicate{}}; }
  static BorderPolicy constant(Rgb fill = {0, 0, 0}) { return {Constant{fill}}; }
  bool is_constant() const noexcept {
    return std::holds_alternative<Constant>(mode);
  }
};

//! Rounds half away from zero and saturates to [0, 255].
inline std::uint8_t saturate_u8(double v) {
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

namespace detail {

inline std::size_t clamp_index(long long i, std::size_t size) {
  if (i < 0) return 0;
  if (static_cast<std::size_t>(i) >= size) return size - 1;
  return static_cast<std::size_t>(i);
}

inline void check_not_empty(const Image& img, const char* what) {
  if (img.empty() || img.width() == 0 || img.height() == 0) {
    throw Error(Errc::EmptyImage, std::string(what) + " is empty");
  }
}

}  // namespace detail

//! Bilinear sample of src at (x, y); out-of-range taps follow the border
//! policy. Integer coordinates reproduce the source pixel exactly.
inline Rgb sample_bilinear(const Image& src, double x, double y,
                           const BorderPolicy& border) {
  const bool constant = border.is_constant();
  const Rgb fill = constant ? std::get<BorderPolicy::Constant>(border.mode).fill
                            : Rgb{0, 0, 0};
  if (!std::isfinite(x) || !std::isfinite(y)) {
    return fill;
  }
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double ax = x - fx0;
  const double ay = y - fy0;
  const auto x0 = static_cast<long long>(fx0);
  const auto y0 = static_cast<long long>(fy0);
  const auto w = static_cast<long long>(src.width());
  const auto h = static_cast<long long>(src.height());

  auto tap = [&](long long xi, long long yi, std::size_t ch) -> double {
    if (constant && (xi < 0 || yi < 0 || xi >= w || yi >= h)) {
      return fill[ch];
    }
    return src.pixel(detail::clamp_index(yi, src.height()),
                     detail::clamp_index(xi, src.width()))[ch];
  };

  Rgb out{};
  for (std::size_t ch = 0; ch < Image::kChannels; ++ch) {
    const double top = (1.0 - ax) * tap(x0, y0, ch) + ax * tap(x0 + 1, y0, ch);
    const double bottom =
        (1.0 - ax) * tap(x0, y0 + 1, ch) + ax * tap(x0 + 1, y0 + 1, ch);
    out[ch] = saturate_u8((1.0 - ay) * top + ay * bottom);
  }
  return out;
}

//! Inverse-mapping warp: the output has the map's dimensions.
inline Image remap(const Image& src, const CoordMap& map,
                   const BorderPolicy& border = BorderPolicy::replicate(),
                   unsigned jobs = 1) {
  detail::check_not_empty(src, "remap source");
  if (map.src_y.width() != map.width() || map.src_y.height() != map.height()) {
    throw Error(Errc::DimensionMismatch, "coordinate map x/y planes differ");
  }
  Image out(map.width(), map.height());
  parallel_for_rows(map.height(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t c = 0; c < map.width(); ++c) {
        out.set(r, c, sample_bilinear(src, map.src_x(r, c), map.src_y(r, c), border));
      }
    }
  });
  return out;
}

//! Pixel-center aligned bilinear resize with replicated borders.
inline Image resize_bilinear(const Image& src, std::size_t width,
                             std::size_t height) {
  detail::check_not_empty(src, "resize source");
  if (src.width() == width && src.height() == height) return src;
  CoordMap map(width, height);
  const double sx = static_cast<double>(src.width()) / static_cast<double>(width);
  const double sy = static_cast<double>(src.height()) / static_cast<double>(height);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      map.src_x(r, c) = (static_cast<double>(c) + 0.5) * sx - 0.5;
      map.src_y(r, c) = (static_cast<double>(r) + 0.5) * sy - 0.5;
    }
  }
  return remap(src, map, BorderPolicy::replicate());
}

//! Pixel-center aligned bilinear resample of a scalar grid (replicated
//! borders). Output values stay within the input's [min, max].
inline Grid<double> resample_bilinear(const Grid<double>& src, std::size_t width,
                                      std::size_t height) {
  if (src.empty()) throw Error(Errc::EmptyImage, "resample source is empty");
  if (src.width() == width && src.height() == height) return src;
  Grid<double> out(width, height);
  const double sx = static_cast<double>(src.width()) / static_cast<double>(width);
  const double sy = static_cast<double>(src.height()) / static_cast<double>(height);
  for (std::size_t r = 0; r < height; ++r) {
    const double y = (static_cast<double>(r) + 0.5) * sy - 0.5;
    const double fy = std::floor(y);
    const double ay = y - fy;
    const auto y0 = detail::clamp_index(static_cast<long long>(fy), src.height());
    const auto y1 = detail::clamp_index(static_cast<long long>(fy) + 1, src.height());
    for (std::size_t c = 0; c < width; ++c) {
      const double x = (static_cast<double>(c) + 0.5) * sx - 0.5;
      const double fx = std::floor(x);
      const double ax = x - fx;
      const auto x0 = detail::clamp_index(static_cast<long long>(fx), src.width());
      const auto x1 = detail::clamp_index(static_cast<long long>(fx) + 1, src.width());
      const double top = (1.0 - ax) * src(y0, x0) + ax * src(y0, x1);
      const double bottom = (1.0 - ax) * src(y1, x0) + ax * src(y1, x1);
      out(r, c) = (1.0 - ay) * top + ay * bottom;
    }
  }
  return out;
}

//! Per-channel median over a (2r+1)^2 window with replicated borders.
inline Image median_filter(const Image& src, int radius, unsigned jobs = 1) {
  detail::check_not_empty(src, "median filter source");
  if (radius < 1) {
    throw Error(Errc::InvalidValue, "median radius must be >= 1");
  }
  Image out(src.width(), src.height());
  const auto side = static_cast<std::size_t>(2 * radius + 1);
  parallel_for_rows(src.height(), jobs, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint8_t> window(side * side);
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t c = 0; c < src.width(); ++c) {
        for (std::size_t ch = 0; ch < Image::kChannels; ++ch) {
          std::size_t n = 0;
          for (int dy = -radius; dy <= radius; ++dy) {
            const auto y = detail::clamp_index(static_cast<long long>(r) + dy, src.height());
            for (int dx = -radius; dx <= radius; ++dx) {
              const auto x = detail::clamp_index(static_cast<long long>(c) + dx, src.width());
              window[n++] = src.pixel(y, x)[ch];
            }
          }
          auto mid = window.begin() + static_cast<std::ptrdiff_t>(n / 2);
          std::nth_element(window.begin(), mid, window.begin() + static_cast<std::ptrdiff_t>(n));
          out.pixel(r, c)[ch] = *mid;
        }
      }
    }
  });
  return out;
}

}  // namespace a3d

#endif  // A3D_IMAGE_HPP
