#ifndef A3D_DEPTH_ESTIMATOR_HPP
#define A3D_DEPTH_ESTIMATOR_HPP

#include <filesystem>

#include "a3d/image.hpp"

namespace a3d {

//! Single-image depth inference backend. Output is relative inverse depth
//! (larger = nearer) at any resolution.
class DepthEstimator {
 public:
  virtual ~DepthEstimator() = default;
  virtual Grid<double> estimate(const Image& image) = 0;
};

//! Network file plus the input resolution it expects.
struct ModelDescriptor {
  std::filesystem::path path;
  int input_width = 256;
  int input_height = 256;
};

}  // namespace a3d

#endif  // A3D_DEPTH_ESTIMATOR_HPP
