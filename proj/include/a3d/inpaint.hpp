#ifndef A3D_INPAINT_HPP
#define A3D_INPAINT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "a3d/error.hpp"
#include "a3d/image.hpp"

namespace a3d {

//! true = missing pixel.
class HoleMask {
 public:
  HoleMask() = default;
  HoleMask(std::size_t width, std::size_t height) : flags_(width, height, 0) {}

  std::size_t width() const noexcept { return flags_.width(); }
  std::size_t height() const noexcept { return flags_.height(); }
  bool operator()(std::size_t row, std::size_t col) const { return flags_(row, col) != 0; }
  void set(std::size_t row, std::size_t col, bool missing = true) {
    flags_(row, col) = missing ? 1 : 0;
  }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(flags_.values().begin(), flags_.values().end(), 1));
  }
  bool none() const { return count() == 0; }

  bool operator==(const HoleMask&) const = default;

 private:
  Grid<std::uint8_t> flags_;
};

enum class FmmLabel : std::uint8_t { Known, Band, Inside };

struct EikonalSample {
  double t = 0.0;
  FmmLabel label = FmmLabel::Known;
};

//! Four-neighborhood of a grid point; absent entries lie outside the image.
struct EikonalStencil {
  std::optional<EikonalSample> left, right, up, down;
};

//! Upwind update for |grad T| = 1 on a unit grid. Only KNOWN/BAND samples
//! take part; per axis the smaller arrival time is used.
inline double solve_eikonal_step(const EikonalStencil& s) {
  constexpr double kNone = std::numeric_limits<double>::infinity();
  auto usable = [](const std::optional<EikonalSample>& n) {
    return n && n->label != FmmLabel::Inside ? n->t : kNone;
  };
  const double a = std::min(usable(s.left), usable(s.right));
  const double b = std::min(usable(s.up), usable(s.down));
  if (a == kNone && b == kNone) {
    throw Error(Errc::NoKnownNeighbor, "eikonal update without a known neighbor");
  }
  if (a == kNone || b == kNone) return std::min(a, b) + 1.0;
  const double disc = 2.0 - (a - b) * (a - b);
  if (disc >= 0.0) {
    const double t = 0.5 * (a + b + std::sqrt(disc));
    if (t >= std::max(a, b)) return t;
  }
  return std::min(a, b) + 1.0;
}

//! Optional diagnostics: arrival time of every pixel in pop order.
struct TeleaTrace {
  std::vector<double> pop_times;
};

namespace detail {

class TeleaSolver {
 public:
  TeleaSolver(const Image& image, const HoleMask& mask, int radius)
      : out_(image),
        w_(image.width()),
        h_(image.height()),
        radius_(radius),
        label_(w_, h_, FmmLabel::Known),
        t_(w_, h_, 0.0) {
    for (std::size_t r = 0; r < h_; ++r) {
      for (std::size_t c = 0; c < w_; ++c) {
        if (mask(r, c)) {
          label_(r, c) = FmmLabel::Inside;
          t_(r, c) = kFar;
        }
      }
    }
    for (std::size_t r = 0; r < h_; ++r) {
      for (std::size_t c = 0; c < w_; ++c) {
        if (label_(r, c) != FmmLabel::Known) continue;
        bool touches_hole = false;
        for_each_neighbor(r, c, [&](std::size_t nr, std::size_t nc) {
          touches_hole |= label_(nr, nc) == FmmLabel::Inside;
        });
        if (touches_hole) {
          label_(r, c) = FmmLabel::Band;
          push(r, c);
        }
      }
    }
  }

  Image run(TeleaTrace* trace) {
    while (!heap_.empty()) {
      const auto [t, seq, idx] = heap_.top();
      heap_.pop();
      const std::size_t r = idx / w_;
      const std::size_t c = idx % w_;
      if (label_(r, c) == FmmLabel::Known) continue;
      label_(r, c) = FmmLabel::Known;
      if (trace) trace->pop_times.push_back(t);
      for_each_neighbor(r, c, [&](std::size_t nr, std::size_t nc) {
        if (label_(nr, nc) != FmmLabel::Inside) return;
        t_(nr, nc) = solve_eikonal_step(stencil(nr, nc));
        fill(nr, nc);
        label_(nr, nc) = FmmLabel::Band;
        push(nr, nc);
      });
    }
    return std::move(out_);
  }

 private:
  static constexpr double kFar = 1.0e6;
  static constexpr double kEps = 1.0e-6;

  using Entry = std::tuple<double, std::uint64_t, std::size_t>;

  template <typename Fn>
  void for_each_neighbor(std::size_t r, std::size_t c, Fn&& fn) const {
    if (c > 0) fn(r, c - 1);
    if (c + 1 < w_) fn(r, c + 1);
    if (r > 0) fn(r - 1, c);
    if (r + 1 < h_) fn(r + 1, c);
  }

  void push(std::size_t r, std::size_t c) { heap_.emplace(t_(r, c), seq_++, r * w_ + c); }

  bool has_value(std::size_t r, std::size_t c) const { return label_(r, c) != FmmLabel::Inside; }

  EikonalStencil stencil(std::size_t r, std::size_t c) const {
    EikonalStencil s;
    auto sample = [&](std::size_t rr, std::size_t cc) {
      return EikonalSample{t_(rr, cc), label_(rr, cc)};
    };
    if (c > 0) s.left = sample(r, c - 1);
    if (c + 1 < w_) s.right = sample(r, c + 1);
    if (r > 0) s.up = sample(r - 1, c);
    if (r + 1 < h_) s.down = sample(r + 1, c);
    return s;
  }

  // Central difference when both neighbors carry values, one-sided when one
  // does, zero otherwise. `value(r, c)` reads the differentiated field.
  template <typename Field>
  std::array<double, 2> gradient(std::size_t r, std::size_t c, bool self, Field&& value) const {
    std::array<double, 2> g{0.0, 0.0};  // {d/dx, d/dy}
    const bool l = c > 0 && has_value(r, c - 1);
    const bool rt = c + 1 < w_ && has_value(r, c + 1);
    const bool u = r > 0 && has_value(r - 1, c);
    const bool d = r + 1 < h_ && has_value(r + 1, c);
    if (l && rt) {
      g[0] = 0.5 * (value(r, c + 1) - value(r, c - 1));
    } else if (rt && self) {
      g[0] = value(r, c + 1) - value(r, c);
    } else if (l && self) {
      g[0] = value(r, c) - value(r, c - 1);
    }
    if (u && d) {
      g[1] = 0.5 * (value(r + 1, c) - value(r - 1, c));
    } else if (d && self) {
      g[1] = value(r + 1, c) - value(r, c);
    } else if (u && self) {
      g[1] = value(r, c) - value(r - 1, c);
    }
    return g;
  }

  // Weighted first-order extrapolation from every valued pixel within the
  // radius, clamped to the range of the contributing samples. The target is
  // still labelled Inside here, so its stale value never enters a gradient.
  void fill(std::size_t r, std::size_t c) {
    const auto grad_t = gradient(r, c, true, [&](std::size_t rr, std::size_t cc) { return t_(rr, cc); });
    const double grad_len = std::hypot(grad_t[0], grad_t[1]);
    const double nx = grad_len > 0.0 ? grad_t[0] / grad_len : 0.0;
    const double ny = grad_len > 0.0 ? grad_t[1] / grad_len : 0.0;

    std::array<double, 3> acc{0.0, 0.0, 0.0};
    std::array<double, 3> lo{255.0, 255.0, 255.0};
    std::array<double, 3> hi{0.0, 0.0, 0.0};
    double wsum = 0.0;
    const long long radius2 = static_cast<long long>(radius_) * radius_;
    const auto r0 = static_cast<long long>(r);
    const auto c0 = static_cast<long long>(c);
    for (long long k = std::max(0LL, r0 - radius_);
         k <= std::min(static_cast<long long>(h_) - 1, r0 + radius_); ++k) {
      for (long long l = std::max(0LL, c0 - radius_);
           l <= std::min(static_cast<long long>(w_) - 1, c0 + radius_); ++l) {
        const auto kr = static_cast<std::size_t>(k);
        const auto lc = static_cast<std::size_t>(l);
        if (!has_value(kr, lc)) continue;
        const double dy = static_cast<double>(r0 - k);
        const double dx = static_cast<double>(c0 - l);
        const double len2 = dx * dx + dy * dy;
        if (len2 > static_cast<double>(radius2) || len2 == 0.0) continue;
        const double len = std::sqrt(len2);
        const double dir = std::max(std::abs(dx * nx + dy * ny) / std::max(len, kEps), kEps);
        const double dst = 1.0 / std::max(len2, kEps);
        const double lev = 1.0 / (1.0 + std::abs(t_(kr, lc) - t_(r, c)));
        const double weight = dir * dst * lev;
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const auto grad_i = gradient(kr, lc, true, [&](std::size_t rr, std::size_t cc) {
            return static_cast<double>(out_.pixel(rr, cc)[ch]);
          });
          const double sample = out_.pixel(kr, lc)[ch];
          acc[ch] += weight * (sample + grad_i[0] * dx + grad_i[1] * dy);
          lo[ch] = std::min(lo[ch], sample);
          hi[ch] = std::max(hi[ch], sample);
        }
        wsum += weight;
      }
    }
    if (!(wsum > 0.0)) {
      throw Error(Errc::InpaintFailure, "no valued pixel within radius of (" + std::to_string(r) +
                                            ", " + std::to_string(c) + ")");
    }
    for (std::size_t ch = 0; ch < 3; ++ch) {
      out_.pixel(r, c)[ch] = saturate_u8(std::clamp(acc[ch] / wsum, lo[ch], hi[ch]));
    }
  }

  Image out_;
  std::size_t w_;
  std::size_t h_;
  int radius_;
  Grid<FmmLabel> label_;
  Grid<double> t_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
  std::uint64_t seq_ = 0;
};

}  // namespace detail

//! Telea fast-marching inpainting. Masked pixels are filled from the hole
//! boundary inward in order of arrival time; unmasked pixels are untouched.
inline Image telea_inpaint(const Image& image, const HoleMask& mask, int radius = 3,
                           TeleaTrace* trace = nullptr) {
  detail::check_not_empty(image, "inpaint source");
  if (mask.width() != image.width() || mask.height() != image.height()) {
    throw Error(Errc::DimensionMismatch, "hole mask does not match image");
  }
  if (radius < 1) throw Error(Errc::InvalidValue, "inpaint radius must be >= 1");
  const std::size_t holes = mask.count();
  if (holes == 0) return image;
  if (holes == image.width() * image.height()) {
    throw Error(Errc::MaskCoversEverything, "no known pixel to inpaint from");
  }
  return detail::TeleaSolver(image, mask, radius).run(trace);
}

}  // namespace a3d

#endif  // A3D_INPAINT_HPP
