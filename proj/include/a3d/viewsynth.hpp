#ifndef A3D_VIEWSYNTH_HPP
#define A3D_VIEWSYNTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "a3d/depth.hpp"
#include "a3d/error.hpp"
#include "a3d/image.hpp"
#include "a3d/inpaint.hpp"
#include "a3d/parallel.hpp"

namespace a3d {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

//! Pinhole projection parameters in pixels.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  bool operator==(const Intrinsics&) const = default;
};

inline void validate(const Intrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0) || !std::isfinite(k.fx) || !std::isfinite(k.fy) ||
      !std::isfinite(k.cx) || !std::isfinite(k.cy)) {
    throw Error(Errc::InvalidValue, "intrinsics need finite positive focal lengths");
  }
}

//! World-to-camera transform: x_cam = rotation * x_world + translation.
struct Pose {
  Mat3 rotation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 translation{0, 0, 0};

  static Pose identity() { return {}; }

  Vec3 apply(const Vec3& x) const {
    Vec3 y{};
    for (std::size_t i = 0; i < 3; ++i) {
      y[i] = rotation[i][0] * x[0] + rotation[i][1] * x[1] + rotation[i][2] * x[2] +
             translation[i];
    }
    return y;
  }

  Vec3 apply_inverse(const Vec3& y) const {
    const Vec3 d{y[0] - translation[0], y[1] - translation[1], y[2] - translation[2]};
    Vec3 x{};
    for (std::size_t i = 0; i < 3; ++i) {
      x[i] = rotation[0][i] * d[0] + rotation[1][i] * d[1] + rotation[2][i] * d[2];
    }
    return x;
  }

  bool operator==(const Pose&) const = default;
};

inline void validate(const Pose& p) {
  constexpr double kTol = 1e-9;
  const auto& m = p.rotation;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < 3; ++k) dot += m[k][i] * m[k][j];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > kTol) {
        throw Error(Errc::InvalidValue, "pose rotation is not orthonormal");
      }
    }
  }
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (std::abs(det - 1.0) > kTol) throw Error(Errc::InvalidValue, "pose rotation has det != 1");
  for (const double t : p.translation) {
    if (!std::isfinite(t)) throw Error(Errc::InvalidValue, "pose translation is not finite");
  }
}

//! Builds the pose reached by applying the relative motion (rotation,
//! translation) in the camera frame of `base`.
inline Pose compose(const Mat3& rotation, const Vec3& translation, const Pose& base) {
  Pose out;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      out.rotation[i][j] = rotation[i][0] * base.rotation[0][j] +
                           rotation[i][1] * base.rotation[1][j] +
                           rotation[i][2] * base.rotation[2][j];
    }
    out.translation[i] = rotation[i][0] * base.translation[0] +
                         rotation[i][1] * base.translation[1] +
                         rotation[i][2] * base.translation[2] + translation[i];
  }
  return out;
}

enum class ViewMode { Fast, Real };

struct ViewRequest {
  std::uint32_t total_views = 1;
  double max_offset = 0.0;  // Fast: peak disparity in px at depth 1. Real: baseline.
  ViewMode mode = ViewMode::Fast;
  bool flip = false;        // reverse the view order
};

inline void validate(const ViewRequest& r) {
  if (r.total_views == 0) throw Error(Errc::InvalidValue, "total_views must be >= 1");
  if (!std::isfinite(r.max_offset)) throw Error(Errc::InvalidValue, "max_offset must be finite");
}

//! Linear, center-symmetric offsets: view v gets
//! max_offset * (v - c) / c with c = (total_views - 1) / 2.
inline std::vector<double> view_offsets(const ViewRequest& request) {
  validate(request);
  const std::uint32_t n = request.total_views;
  std::vector<double> offsets(n, 0.0);
  if (n > 1) {
    const double center = (static_cast<double>(n) - 1.0) / 2.0;
    for (std::uint32_t v = 0; v < n; ++v) {
      offsets[v] = request.max_offset * (static_cast<double>(v) - center) / center;
    }
  }
  if (request.flip) std::reverse(offsets.begin(), offsets.end());
  return offsets;
}

//! Fast-path sampling map: row unchanged, column shifted by depth * offset.
inline CoordMap fast_map_from_depth(const DepthMap& depth, double offset) {
  CoordMap map(depth.width(), depth.height());
  for (std::size_t r = 0; r < depth.height(); ++r) {
    for (std::size_t c = 0; c < depth.width(); ++c) {
      map.src_y(r, c) = static_cast<double>(r);
      map.src_x(r, c) = static_cast<double>(c) - depth(r, c) * offset;
    }
  }
  return map;
}

namespace detail {

inline void check_same_size(const Image& image, const DepthMap& depth) {
  detail::check_not_empty(image, "view synthesis source");
  if (image.width() != depth.width() || image.height() != depth.height()) {
    throw Error(Errc::DimensionMismatch,
                "image " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                    " vs depth " + std::to_string(depth.width()) + "x" +
                    std::to_string(depth.height()));
  }
}

}  // namespace detail

//! One remapped view per offset, the input treated as the center view.
inline std::vector<Image> synthesize_fast(const Image& image, const DepthMap& depth,
                                          const ViewRequest& request, unsigned jobs = 0) {
  detail::check_same_size(image, depth);
  const auto offsets = view_offsets(request);
  std::vector<Image> views(offsets.size());
  parallel_for_rows(offsets.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      views[v] = offsets[v] == 0.0
                     ? image
                     : remap(image, fast_map_from_depth(depth, offsets[v]),
                             BorderPolicy::replicate());
    }
  });
  return views;
}

//! Pinhole focal length (px) from a horizontal field of view.
inline double estimate_focal(double fov_deg, std::size_t image_width_px) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw Error(Errc::InvalidFov, "field of view must lie in (0, 180) degrees");
  }
  return (static_cast<double>(image_width_px) / 2.0) /
         std::tan(fov_deg * std::numbers::pi / 360.0);
}

//! Square-pixel intrinsics with the principal point at the image center.
inline Intrinsics intrinsics_from_fov(double fov_deg, std::size_t width, std::size_t height) {
  const double f = estimate_focal(fov_deg, width);
  return {f, f, (static_cast<double>(width) - 1.0) / 2.0,
          (static_cast<double>(height) - 1.0) / 2.0};
}

//! Linear map from relative depth (1 = near) to metric Z.
struct DepthRange {
  double z_near = 1.0;
  double z_far = 10.0;

  double metric(double relative) const { return z_far + relative * (z_near - z_far); }
};

inline void validate(const DepthRange& range) {
  if (!(range.z_near > 0.0) || !(range.z_far > range.z_near) || !std::isfinite(range.z_far)) {
    throw Error(Errc::InvalidDepthRange, "need 0 < z_near < z_far");
  }
}

struct RealView {
  Image image;
  HoleMask holes;
};

//! Forward-warps the image into a virtual camera translated by
//! (offset, 0, 0) from the original pose. Splats round to the nearest pixel;
//! on collisions the nearest Z wins. Pixels nobody lands on are holes.
inline RealView real_view(const Image& image, const DepthMap& depth, double offset,
                          const Intrinsics& k_o, const Pose& pose_o, const Intrinsics& k_v,
                          const DepthRange& range) {
  detail::check_same_size(image, depth);
  validate(k_o);
  validate(k_v);
  validate(pose_o);
  validate(range);
  if (!std::isfinite(offset)) throw Error(Errc::InvalidValue, "offset must be finite");

  constexpr Mat3 kNoRotation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  const Pose pose_v = compose(kNoRotation, Vec3{offset, 0.0, 0.0}, pose_o);

  const std::size_t w = image.width();
  const std::size_t h = image.height();
  RealView out{Image(w, h), HoleMask(w, h)};
  Grid<double> zbuf(w, h, std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double z = range.metric(depth(r, c));
      const Vec3 cam_o{(static_cast<double>(c) - k_o.cx) / k_o.fx * z,
                       (static_cast<double>(r) - k_o.cy) / k_o.fy * z, z};
      const Vec3 cam_v = pose_v.apply(pose_o.apply_inverse(cam_o));
      if (!(cam_v[2] > 0.0)) continue;
      const double u = k_v.fx * cam_v[0] / cam_v[2] + k_v.cx;
      const double v = k_v.fy * cam_v[1] / cam_v[2] + k_v.cy;
      const double ur = std::round(u);
      const double vr = std::round(v);
      if (ur < 0.0 || vr < 0.0 || ur >= static_cast<double>(w) || vr >= static_cast<double>(h)) {
        continue;
      }
      const auto x = static_cast<std::size_t>(ur);
      const auto y = static_cast<std::size_t>(vr);
      if (cam_v[2] < zbuf(y, x)) {
        zbuf(y, x) = cam_v[2];
        out.image.set(y, x, image.at(r, c));
      }
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (zbuf(r, c) == std::numeric_limits<double>::infinity()) out.holes.set(r, c);
    }
  }
  return out;
}

struct RealSynthesisOptions {
  Intrinsics k_o;
  Pose pose_o;
  Intrinsics k_v;
  DepthRange depth_range;
  int inpaint_radius = 3;
};

namespace detail {

// Hole cleanup: Telea fill, then a 3x3 median over the filled pixels only.
inline Image fill_holes(const Image& warped, const HoleMask& holes, int radius) {
  if (holes.none()) return warped;
  const Image filled = telea_inpaint(warped, holes, radius);
  Image out = filled;
  std::array<std::uint8_t, 9> window{};
  for (std::size_t r = 0; r < filled.height(); ++r) {
    for (std::size_t c = 0; c < filled.width(); ++c) {
      if (!holes(r, c)) continue;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        std::size_t n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const auto y = clamp_index(static_cast<long long>(r) + dy, filled.height());
            const auto x = clamp_index(static_cast<long long>(c) + dx, filled.width());
            window[n++] = filled.pixel(y, x)[ch];
          }
        }
        std::nth_element(window.begin(), window.begin() + 4, window.end());
        out.pixel(r, c)[ch] = window[4];
      }
    }
  }
  return out;
}

}  // namespace detail

//! DIBR views in symmetric +/- offset pairs, holes inpainted. Views come back
//! ordered by offset (left to right); an odd count keeps the input at the
//! center. `masks`, when given, receives each view's hole mask.
inline std::vector<Image> synthesize_real(const Image& image, const DepthMap& depth,
                                          const ViewRequest& request,
                                          const RealSynthesisOptions& options,
                                          unsigned jobs = 0,
                                          std::vector<HoleMask>* masks = nullptr) {
  detail::check_same_size(image, depth);
  validate(options.depth_range);
  if (options.inpaint_radius < 1) throw Error(Errc::InvalidValue, "inpaint radius must be >= 1");
  const auto offsets = view_offsets(request);
  const std::uint32_t n = request.total_views;
  std::vector<Image> views(n);
  std::vector<HoleMask> holes(n, HoleMask(image.width(), image.height()));
  if (n % 2 == 1) views[n / 2] = image;

  auto render = [&](std::size_t index, double offset) {
    RealView rv = real_view(image, depth, offset, options.k_o, options.pose_o, options.k_v,
                            options.depth_range);
    views[index] = detail::fill_holes(rv.image, rv.holes, options.inpaint_radius);
    holes[index] = std::move(rv.holes);
  };
  // Pair i (1-based) covers views n - i and i - 1 with offsets +o and -o.
  parallel_for_rows(n / 2, jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t pair = begin; pair < end; ++pair) {
      const std::size_t i = pair + 1;
      const double offset = offsets[n - i];
      render(n - i, offset);
      render(i - 1, -offset);
    }
  });
  if (masks) *masks = std::move(holes);
  return views;
}

}  // namespace a3d

#endif  // A3D_VIEWSYNTH_HPP
