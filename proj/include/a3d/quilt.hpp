#ifndef A3D_QUILT_HPP
#define A3D_QUILT_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "a3d/error.hpp"
#include "a3d/image.hpp"

namespace a3d {

//! An N x M collage of equally sized views. View 0 sits at the bottom-left
//! tile; indices run left-to-right, then bottom-to-top.
struct QuiltSpec {
  std::uint32_t grid_cols = 1;
  std::uint32_t grid_rows = 1;
  std::uint32_t tile_width_px = 1;
  std::uint32_t tile_height_px = 1;

  std::uint32_t total_views() const noexcept { return grid_cols * grid_rows; }
  std::size_t width() const noexcept {
    return std::size_t{grid_cols} * tile_width_px;
  }
  std::size_t height() const noexcept {
    return std::size_t{grid_rows} * tile_height_px;
  }

  //! Top-left raster corner (x, y) of view v's tile.
  std::pair<std::size_t, std::size_t> tile_origin(std::uint32_t v) const noexcept {
    const std::uint32_t col = v % grid_cols;
    const std::uint32_t row_from_bottom = v / grid_cols;
    return {std::size_t{col} * tile_width_px,
            std::size_t{grid_rows - 1 - row_from_bottom} * tile_height_px};
  }

  bool operator==(const QuiltSpec&) const = default;
};

inline void validate(const QuiltSpec& spec) {
  if (spec.grid_cols == 0 || spec.grid_rows == 0) {
    throw Error(Errc::InvalidValue, "quilt grid must have at least one column and row");
  }
  if (spec.tile_width_px == 0 || spec.tile_height_px == 0) {
    throw Error(Errc::InvalidValue, "quilt tiles must be non-empty");
  }
}

inline Image assemble_quilt(std::span<const Image> views, const QuiltSpec& spec) {
  validate(spec);
  if (views.size() != spec.total_views()) {
    throw Error(Errc::WrongViewCount, "expected " + std::to_string(spec.total_views()) +
                                          " views, got " + std::to_string(views.size()));
  }
  Image quilt(spec.width(), spec.height());
  const std::size_t row_bytes = std::size_t{spec.tile_width_px} * Image::kChannels;
  for (std::uint32_t v = 0; v < spec.total_views(); ++v) {
    const Image& view = views[v];
    if (view.width() != spec.tile_width_px || view.height() != spec.tile_height_px) {
      throw Error(Errc::TileDimensionMismatch,
                  "view " + std::to_string(v) + " is " + std::to_string(view.width()) + "x" +
                      std::to_string(view.height()) + ", tiles are " +
                      std::to_string(spec.tile_width_px) + "x" +
                      std::to_string(spec.tile_height_px));
    }
    const auto [x0, y0] = spec.tile_origin(v);
    for (std::size_t r = 0; r < spec.tile_height_px; ++r) {
      std::copy_n(view.pixel(r, 0), row_bytes, quilt.pixel(y0 + r, x0));
    }
  }
  return quilt;
}

inline Image extract_tile(const Image& quilt, const QuiltSpec& spec, std::uint32_t v) {
  validate(spec);
  if (quilt.width() != spec.width() || quilt.height() != spec.height()) {
    throw Error(Errc::DimensionMismatch,
                "quilt is " + std::to_string(quilt.width()) + "x" +
                    std::to_string(quilt.height()) + ", layout expects " +
                    std::to_string(spec.width()) + "x" + std::to_string(spec.height()));
  }
  if (v >= spec.total_views()) {
    throw Error(Errc::IndexOutOfRange, "view " + std::to_string(v) + " of " +
                                           std::to_string(spec.total_views()));
  }
  Image tile(spec.tile_width_px, spec.tile_height_px);
  const auto [x0, y0] = spec.tile_origin(v);
  const std::size_t row_bytes = std::size_t{spec.tile_width_px} * Image::kChannels;
  for (std::size_t r = 0; r < spec.tile_height_px; ++r) {
    std::copy_n(quilt.pixel(y0 + r, x0), row_bytes, tile.pixel(r, 0));
  }
  return tile;
}

//! "<name>_qs<N>x<M>.png"
inline std::string quilt_file_name(const std::string& name, const QuiltSpec& spec) {
  return name + "_qs" + std::to_string(spec.grid_cols) + "x" +
         std::to_string(spec.grid_rows) + ".png";
}

//! Recovers (cols, rows) from a file name following quilt_file_name.
inline std::optional<std::pair<std::uint32_t, std::uint32_t>> parse_quilt_file_name(
    const std::string& file_name) {
  static const std::regex pattern(R"(_qs([0-9]+)x([0-9]+)\.png$)");
  std::smatch m;
  if (!std::regex_search(file_name, m, pattern)) return std::nullopt;
  const auto cols = std::stoul(m[1].str());
  const auto rows = std::stoul(m[2].str());
  if (cols == 0 || rows == 0) return std::nullopt;
  return std::pair{static_cast<std::uint32_t>(cols), static_cast<std::uint32_t>(rows)};
}

}  // namespace a3d

#endif  // A3D_QUILT_HPP
