#ifndef A3D_NATIVE_HPP
#define A3D_NATIVE_HPP

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "a3d/calibration.hpp"
#include "a3d/error.hpp"
#include "a3d/image.hpp"
#include "a3d/lut.hpp"
#include "a3d/parallel.hpp"
#include "a3d/quilt.hpp"

namespace a3d {

//! Native raster by table lookup: channel c of pixel (x, y) copies channel c
//! of the quilt pixel stored for it.
inline Image render_native_lut(const Image& quilt, const LookupTable& table, unsigned jobs = 0) {
  if (quilt.width() != table.quilt_width_px || quilt.height() != table.quilt_height_px) {
    throw Error(Errc::DimensionMismatch,
                "quilt is " + std::to_string(quilt.width()) + "x" +
                    std::to_string(quilt.height()) + ", map expects " +
                    std::to_string(table.quilt_width_px) + "x" +
                    std::to_string(table.quilt_height_px));
  }
  Image out(table.native_width_px, table.native_height_px);
  const std::size_t stride = table.row_stride();
  parallel_for_rows(table.native_height_px, jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t y = begin; y < end; ++y) {
      const std::uint16_t* r = table.channels[0].data() + y * stride;
      const std::uint16_t* g = table.channels[1].data() + y * stride;
      const std::uint16_t* b = table.channels[2].data() + y * stride;
      std::uint8_t* dst = out.pixel(y, 0);
      for (std::size_t x = 0; x < table.native_width_px; ++x, dst += 3) {
        const std::size_t k = 2 * x;
        dst[0] = quilt.pixel(r[k + 1], r[k])[0];
        dst[1] = quilt.pixel(g[k + 1], g[k])[1];
        dst[2] = quilt.pixel(b[k + 1], b[k])[2];
      }
    }
  });
  return out;
}

//! Reference renderer: evaluates the lens mapping for every subpixel on the
//! fly. Used as the oracle and benchmark baseline for render_native_lut.
inline Image render_native_direct(const Image& quilt, const CalibrationProfile& profile,
                                  const QuiltSpec& spec, unsigned jobs = 0) {
  validate(profile);
  validate(spec);
  if (quilt.width() != spec.width() || quilt.height() != spec.height()) {
    throw Error(Errc::DimensionMismatch,
                "quilt is " + std::to_string(quilt.width()) + "x" +
                    std::to_string(quilt.height()) + ", layout expects " +
                    std::to_string(spec.width()) + "x" + std::to_string(spec.height()));
  }
  Image out(profile.screen_width_px, profile.screen_height_px);
  parallel_for_rows(profile.screen_height_px, jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t y = begin; y < end; ++y) {
      std::uint8_t* dst = out.pixel(y, 0);
      for (std::size_t x = 0; x < profile.screen_width_px; ++x, dst += 3) {
        for (std::size_t c = 0; c < 3; ++c) {
          const auto q = subpixel_source(x, y, c, profile, spec);
          dst[c] = quilt.pixel(q.y, q.x)[c];
        }
      }
    }
  });
  return out;
}

struct BenchmarkReport {
  double lut_ms = 0.0;
  double direct_ms = 0.0;
  double ratio = 0.0;  // direct_ms / lut_ms

  std::string csv() const {
    return std::to_string(lut_ms) + "," + std::to_string(direct_ms) + "," +
           std::to_string(ratio);
  }
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

//! Median wall time of each renderer over `iterations` runs (>= 3).
inline BenchmarkReport benchmark_render(const Image& quilt, const LookupTable& table,
                                        const CalibrationProfile& profile, const QuiltSpec& spec,
                                        int iterations, unsigned jobs = 0) {
  if (iterations < 3) {
    throw Error(Errc::InvalidValue, "benchmark needs at least 3 iterations");
  }
  using clock = std::chrono::steady_clock;
  std::vector<double> lut_times, direct_times;
  for (int it = 0; it < iterations; ++it) {
    auto t0 = clock::now();
    const Image a = render_native_lut(quilt, table, jobs);
    auto t1 = clock::now();
    const Image b = render_native_direct(quilt, profile, spec, jobs);
    auto t2 = clock::now();
    lut_times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    direct_times.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
  }
  BenchmarkReport report;
  report.lut_ms = detail::median_of(lut_times);
  report.direct_ms = detail::median_of(direct_times);
  report.ratio = report.lut_ms > 0.0 ? report.direct_ms / report.lut_ms : 0.0;
  return report;
}

}  // namespace a3d

#endif  // A3D_NATIVE_HPP
