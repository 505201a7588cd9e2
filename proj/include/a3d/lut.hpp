#ifndef A3D_LUT_HPP
#define A3D_LUT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "a3d/calibration.hpp"
#include "a3d/error.hpp"
#include "a3d/parallel.hpp"
#include "a3d/quilt.hpp"

namespace a3d {

//! View fractions closer than this to an integer are snapped to it.
inline constexpr double kBoundarySnap = 1e-9;

//! Fractional view number in [0, total_views) seen through the lens at
//! subpixel column i of panel row j:
//!
//!   total_views * mod(i - center - subp * j * slope, pitch) / pitch
//!
//! with a Euclidean (non-negative) modulo.
inline double view_fraction(std::int64_t i, std::int64_t j, const CalibrationProfile& p,
                            std::uint32_t total_views) {
  const double phase = static_cast<double>(i) - p.center_offset -
                       static_cast<double>(p.subpixels_per_pixel) *
                           static_cast<double>(j) * p.slope;
  double m = std::fmod(phase, p.pitch_px);
  if (m < 0.0) m += p.pitch_px;
  if (m >= p.pitch_px) m -= p.pitch_px;  // -tiny + pitch rounds up to pitch
  const double n = static_cast<double>(total_views);
  double v = n * m / p.pitch_px;
  // Phases that sit on a view boundary in exact arithmetic land on either
  // side after rounding; snap them so the boundary belongs to the upper view.
  const double nearest = std::round(v);
  if (std::abs(v - nearest) < kBoundarySnap) v = nearest == n ? 0.0 : nearest;
  return v < n ? v : std::nextafter(n, 0.0);
}

//! Quilt pixel feeding one native subpixel.
struct QuiltCoord {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  bool operator==(const QuiltCoord&) const = default;
};

namespace detail {

//! Nearest source index of destination pixel `dst` when `dst_size` pixels are
//! spread over `src_size` (pixel centers aligned), clamped to the source.
inline std::size_t proportional_index(std::size_t dst, std::size_t dst_size,
                                      std::size_t src_size) {
  const double pos = (static_cast<double>(dst) + 0.5) * static_cast<double>(src_size) /
                         static_cast<double>(dst_size) -
                     0.5;
  const long long k = std::llround(pos);
  return static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(src_size) - 1));
}

}  // namespace detail

//! Source coordinate for channel `channel` of native pixel (x, y):
//! view index from view_fraction (floored, clamped, mirrored by flip_x),
//! then the pixel's proportional position inside that view's tile.
inline QuiltCoord subpixel_source(std::size_t x, std::size_t y, std::size_t channel,
                                  const CalibrationProfile& p, const QuiltSpec& spec) {
  const std::uint32_t n = spec.total_views();
  const std::size_t row = p.flip_y ? p.screen_height_px - 1 - y : y;
  const auto i = static_cast<std::int64_t>(p.subpixels_per_pixel * x + channel);
  const double vf = view_fraction(i, static_cast<std::int64_t>(row), p, n);
  auto k = static_cast<std::uint32_t>(std::clamp(std::floor(vf), 0.0, static_cast<double>(n - 1)));
  if (p.flip_x) k = n - 1 - k;
  const auto [x0, y0] = spec.tile_origin(k);
  const std::size_t xt = detail::proportional_index(x, p.screen_width_px, spec.tile_width_px);
  const std::size_t yt = detail::proportional_index(y, p.screen_height_px, spec.tile_height_px);
  return {static_cast<std::uint16_t>(x0 + xt), static_cast<std::uint16_t>(y0 + yt)};
}

struct LutBuildRequest {
  CalibrationProfile profile;
  QuiltSpec quilt;
};

//! Per-channel matrices of quilt coordinates; each row holds native_width
//! interleaved (x, y) pairs.
struct LookupTable {
  std::uint32_t native_width_px = 0;
  std::uint32_t native_height_px = 0;
  std::uint32_t quilt_width_px = 0;
  std::uint32_t quilt_height_px = 0;
  std::uint32_t grid_cols = 0;
  std::uint32_t grid_rows = 0;
  std::array<std::vector<std::uint16_t>, 3> channels;

  std::size_t row_stride() const noexcept { return 2 * std::size_t{native_width_px}; }
  std::size_t entries_per_channel() const noexcept {
    return row_stride() * native_height_px;
  }
  QuiltCoord at(std::size_t channel, std::size_t y, std::size_t x) const {
    const std::size_t idx = y * row_stride() + 2 * x;
    return {channels[channel][idx], channels[channel][idx + 1]};
  }

  bool operator==(const LookupTable&) const = default;
};

inline constexpr std::size_t kLutHeaderBytes = 32;
inline constexpr std::array<char, 8> kLutMagic{'A', '3', 'D', 'L', 'U', 'T', '0', '1'};

inline LookupTable build_lut(const LutBuildRequest& request, unsigned jobs = 0) {
  const auto& p = request.profile;
  const auto& spec = request.quilt;
  validate(p);
  validate(spec);
  if (spec.width() >= 65536 || spec.height() >= 65536) {
    throw Error(Errc::QuiltTooLarge, "quilt " + std::to_string(spec.width()) + "x" +
                                         std::to_string(spec.height()) +
                                         " exceeds 16-bit coordinates");
  }
  LookupTable t;
  t.native_width_px = p.screen_width_px;
  t.native_height_px = p.screen_height_px;
  t.quilt_width_px = static_cast<std::uint32_t>(spec.width());
  t.quilt_height_px = static_cast<std::uint32_t>(spec.height());
  t.grid_cols = spec.grid_cols;
  t.grid_rows = spec.grid_rows;
  for (auto& ch : t.channels) ch.assign(t.entries_per_channel(), 0);

  parallel_for_rows(t.native_height_px, jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t y = begin; y < end; ++y) {
      for (std::size_t x = 0; x < t.native_width_px; ++x) {
        const std::size_t idx = y * t.row_stride() + 2 * x;
        for (std::size_t c = 0; c < 3; ++c) {
          const auto q = subpixel_source(x, y, c, p, spec);
          t.channels[c][idx] = q.x;
          t.channels[c][idx + 1] = q.y;
        }
      }
    }
  });
  return t;
}

inline LookupTable build_lut(const CalibrationProfile& profile, const QuiltSpec& spec,
                             unsigned jobs = 0) {
  return build_lut(LutBuildRequest{profile, spec}, jobs);
}

//! True when the table was built for this device raster and quilt layout.
inline bool matches(const LookupTable& t, const CalibrationProfile& p, const QuiltSpec& spec) {
  return t.native_width_px == p.screen_width_px && t.native_height_px == p.screen_height_px &&
         t.quilt_width_px == spec.width() && t.quilt_height_px == spec.height() &&
         t.grid_cols == spec.grid_cols && t.grid_rows == spec.grid_rows;
}

//! .map layout (little-endian):
//!   magic "A3DLUT01"
//!   u32 native_w, native_h, quilt_w, quilt_h, grid_cols, grid_rows
//!   R, G, B matrices: native_h rows of native_w (x, y) u16 pairs
inline std::vector<std::uint8_t> serialize_lut(const LookupTable& t) {
  std::vector<std::uint8_t> out(kLutMagic.begin(), kLutMagic.end());
  out.reserve(kLutHeaderBytes + 3 * t.entries_per_channel() * 2);
  auto put32 = [&](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  };
  put32(t.native_width_px);
  put32(t.native_height_px);
  put32(t.quilt_width_px);
  put32(t.quilt_height_px);
  put32(t.grid_cols);
  put32(t.grid_rows);
  for (const auto& ch : t.channels) {
    if (ch.size() != t.entries_per_channel()) {
      throw Error(Errc::DimensionMismatch, "channel matrix size disagrees with header");
    }
    for (const std::uint16_t v : ch) {
      out.push_back(static_cast<std::uint8_t>(v & 0xff));
      out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
  }
  return out;
}

inline LookupTable deserialize_lut(std::span<const std::uint8_t> bytes) {
  const std::size_t magic_len = std::min(bytes.size(), kLutMagic.size());
  if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(magic_len),
                  kLutMagic.begin())) {
    throw Error(Errc::BadMagic, "not an A3DLUT01 map");
  }
  if (bytes.size() < kLutHeaderBytes) {
    throw Error(Errc::TruncatedFile, "map header is " + std::to_string(bytes.size()) + " bytes");
  }
  auto get32 = [&](std::size_t off) {
    return std::uint32_t{bytes[off]} | std::uint32_t{bytes[off + 1]} << 8 |
           std::uint32_t{bytes[off + 2]} << 16 | std::uint32_t{bytes[off + 3]} << 24;
  };
  LookupTable t;
  t.native_width_px = get32(8);
  t.native_height_px = get32(12);
  t.quilt_width_px = get32(16);
  t.quilt_height_px = get32(20);
  t.grid_cols = get32(24);
  t.grid_rows = get32(28);
  if (t.native_width_px == 0 || t.native_height_px == 0 || t.quilt_width_px == 0 ||
      t.quilt_height_px == 0 || t.grid_cols == 0 || t.grid_rows == 0 ||
      t.quilt_width_px % t.grid_cols != 0 || t.quilt_height_px % t.grid_rows != 0 ||
      t.quilt_width_px >= 65536 || t.quilt_height_px >= 65536) {
    throw Error(Errc::DimensionMismatch, "inconsistent map header");
  }
  const std::size_t payload = 3 * t.entries_per_channel() * 2;
  const std::size_t available = bytes.size() - kLutHeaderBytes;
  if (available < payload) {
    throw Error(Errc::TruncatedFile, "map payload has " + std::to_string(available) +
                                         " of " + std::to_string(payload) + " bytes");
  }
  if (available > payload) {
    throw Error(Errc::DimensionMismatch, "map has " + std::to_string(available - payload) +
                                             " trailing bytes");
  }
  const std::uint8_t* p = bytes.data() + kLutHeaderBytes;
  for (auto& ch : t.channels) {
    ch.resize(t.entries_per_channel());
    for (std::size_t i = 0; i < ch.size(); ++i, p += 2) {
      ch[i] = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }
    for (std::size_t i = 0; i < ch.size(); i += 2) {
      if (ch[i] >= t.quilt_width_px || ch[i + 1] >= t.quilt_height_px) {
        throw Error(Errc::DimensionMismatch, "map entry outside the quilt");
      }
    }
  }
  return t;
}

inline void save_lut(const std::filesystem::path& path, const LookupTable& t) {
  const auto bytes = serialize_lut(t);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::WriteFailure, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::WriteFailure, "failed writing '" + path.string() + "'");
}

inline LookupTable load_lut(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableInput, "cannot open map '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_lut(bytes);
}

}  // namespace a3d

#endif  // A3D_LUT_HPP
