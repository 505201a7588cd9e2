#ifndef A3D_ONNX_DEPTH_HPP
#define A3D_ONNX_DEPTH_HPP

#include <filesystem>
#include <cstdint>
#include <string>

#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wdeprecated-enum-enum-conversion"
#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>
#pragma GCC diagnostic pop

#include "a3d/depth_estimator.hpp"
#include "a3d/error.hpp"
#include "a3d/image.hpp"

namespace a3d {

//! Monocular depth network in ONNX format run through OpenCV DNN.
//! Input: RGB scaled to [0, 1], normalized with the ImageNet mean/std and
//! resized to the descriptor's input size. Output: 1xHxW (or 1x1xHxW)
//! relative inverse depth.
class OnnxDepthEstimator final : public DepthEstimator {
 public:
  explicit OnnxDepthEstimator(const ModelDescriptor& model) : model_(model) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(model.path, ec)) {
      throw Error(Errc::ModelLoadFailure, "model '" + model.path.string() + "' not found");
    }
    if (model.input_width <= 0 || model.input_height <= 0) {
      throw Error(Errc::ModelLoadFailure, "model input size must be positive");
    }
    try {
      net_ = cv::dnn::readNetFromONNX(model.path.string());
    } catch (const cv::Exception& e) {
      throw Error(Errc::ModelLoadFailure, "'" + model.path.string() + "': " + e.what());
    }
    if (net_.empty()) {
      throw Error(Errc::ModelLoadFailure, "'" + model.path.string() + "' holds no network");
    }
  }

  Grid<double> estimate(const Image& image) override {
    cv::Mat rgb(static_cast<int>(image.height()), static_cast<int>(image.width()), CV_8UC3,
                const_cast<std::uint8_t*>(image.bytes().data()));
    cv::Mat input;
    rgb.convertTo(input, CV_32FC3, 1.0 / 255.0);
    // area when shrinking, linear otherwise: no overshoot past the input range
    const bool shrink = model_.input_width * model_.input_height < input.cols * input.rows;
    cv::resize(input, input, cv::Size(model_.input_width, model_.input_height), 0, 0,
               shrink ? cv::INTER_AREA : cv::INTER_LINEAR);
    cv::subtract(input, cv::Scalar(0.485, 0.456, 0.406), input);
    cv::divide(input, cv::Scalar(0.229, 0.224, 0.225), input);
    cv::Mat out;
    try {
      net_.setInput(cv::dnn::blobFromImage(input));
      out = net_.forward();
    } catch (const cv::Exception& e) {
      throw Error(Errc::ModelLoadFailure, std::string("inference failed: ") + e.what());
    }
    if (out.dims < 2 || out.type() != CV_32F) {
      throw Error(Errc::ModelLoadFailure, "unexpected network output layout");
    }
    const int h = out.size[out.dims - 2];
    const int w = out.size[out.dims - 1];
    Grid<double> depth(static_cast<std::size_t>(w), static_cast<std::size_t>(h));
    const float* src = out.ptr<float>();
    auto dst = depth.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i];
    return depth;
  }

 private:
  ModelDescriptor model_;
  cv::dnn::Net net_;
};

}  // namespace a3d

#endif  // A3D_ONNX_DEPTH_HPP
