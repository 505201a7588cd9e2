#ifndef A3D_DEPTH_HPP
#define A3D_DEPTH_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <variant>

#include "a3d/error.hpp"
#include "a3d/image.hpp"
#include "a3d/depth_estimator.hpp"
#include "a3d/image_io.hpp"

#if defined(A3D_WITH_OPENCV_DNN)
#include "a3d/onnx_depth.hpp"
#endif

namespace a3d {

//! Relative per-pixel depth in [0, 1]; 1 is nearest, 0 farthest.
class DepthMap {
 public:
  DepthMap() = default;

  //! Wraps values already in [0, 1]; throws InvalidValue otherwise.
  explicit DepthMap(Grid<double> values) : values_(std::move(values)) {
    for (const double v : values_.values()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(Errc::InvalidValue, "depth value outside [0, 1]");
      }
    }
  }

  static DepthMap constant(std::size_t width, std::size_t height, double value) {
    return DepthMap(Grid<double>(width, height, value));
  }

  std::size_t width() const noexcept { return values_.width(); }
  std::size_t height() const noexcept { return values_.height(); }
  double operator()(std::size_t row, std::size_t col) const { return values_(row, col); }
  const Grid<double>& values() const noexcept { return values_; }

  bool operator==(const DepthMap&) const = default;

 private:
  Grid<double> values_;
};

//! Affine rescale to [0, 1]: (v - min) / (max - min), optionally inverted.
//! A constant input maps to 0.5 everywhere.
inline DepthMap normalize_depth(const Grid<double>& raw, bool invert = false) {
  if (raw.empty()) throw Error(Errc::EmptyImage, "raw depth is empty");
  double lo = raw.values()[0];
  double hi = lo;
  for (const double v : raw.values()) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "raw depth has a non-finite sample");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Grid<double> out(raw.width(), raw.height(), 0.5);
  if (hi > lo) {
    const double range = hi - lo;
    auto src = raw.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double s = std::clamp((src[i] - lo) / range, 0.0, 1.0);
      dst[i] = invert ? 1.0 - s : s;
    }
  }
  return DepthMap(std::move(out));
}

inline std::shared_ptr<DepthEstimator> make_model_estimator(const ModelDescriptor& model) {
#if defined(A3D_WITH_OPENCV_DNN)
  return std::make_shared<OnnxDepthEstimator>(model);
#else
  throw Error(Errc::ProviderUnavailable,
              "model inference not compiled in; cannot load '" + model.path.string() + "'");
#endif
}

//! Where depth comes from: a raster on disk or an inference model.
class DepthProvider {
 public:
  struct File {
    std::filesystem::path path;
  };
  struct Model {
    ModelDescriptor descriptor;
  };

  static DepthProvider file(std::filesystem::path path, bool invert = false) {
    return DepthProvider(File{std::move(path)}, invert);
  }
  static DepthProvider model(ModelDescriptor descriptor, bool invert = false) {
    return DepthProvider(Model{std::move(descriptor)}, invert);
  }
  //! Model provider backed by a caller-supplied estimator.
  static DepthProvider model(std::shared_ptr<DepthEstimator> estimator, bool invert = false) {
    DepthProvider p(Model{}, invert);
    p.state_->estimator = std::move(estimator);
    return p;
  }

  bool is_file() const noexcept { return std::holds_alternative<File>(source_); }
  bool invert() const noexcept { return invert_; }
  const std::variant<File, Model>& source() const noexcept { return source_; }

  //! Raw (un-normalized) depth samples at the source's own resolution.
  //! Model providers need the image; calls on one provider are serialized.
  Grid<double> raw(const Image* image) const {
    if (const auto* f = std::get_if<File>(&source_)) {
      return read_raw_file(f->path);
    }
    if (image == nullptr || image->empty()) {
      throw Error(Errc::ProviderUnavailable, "model depth provider needs a source image");
    }
    std::lock_guard lock(state_->mutex);
    if (!state_->estimator) {
      state_->estimator = make_model_estimator(std::get<Model>(source_).descriptor);
    }
    return state_->estimator->estimate(*image);
  }

 private:
  struct Shared {
    std::mutex mutex;
    std::shared_ptr<DepthEstimator> estimator;
  };

  DepthProvider(std::variant<File, Model> source, bool invert)
      : source_(std::move(source)), invert_(invert), state_(std::make_shared<Shared>()) {}

  static Grid<double> read_raw_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
      throw Error(Errc::UnreadableInput, "depth file '" + path.string() + "' not found");
    }
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    if (ext == ".pfm") return read_pfm(path);
    if (ext == ".png") return read_gray_png(path);
    throw Error(Errc::UnreadableInput, "unsupported depth format '" + ext + "'");
  }

  std::variant<File, Model> source_;
  bool invert_ = false;
  std::shared_ptr<Shared> state_;
};

//! Depth resampled (bilinear) to the target size, then normalized.
inline DepthMap load_depth(const DepthProvider& provider, std::size_t target_width,
                           std::size_t target_height, const Image* image = nullptr) {
  if (target_width == 0 || target_height == 0) {
    throw Error(Errc::InvalidValue, "depth target size must be positive");
  }
  const Grid<double> raw = provider.raw(image);
  return normalize_depth(resample_bilinear(raw, target_width, target_height), provider.invert());
}

}  // namespace a3d

#endif  // A3D_DEPTH_HPP
