#ifndef A3D_A3D_HPP
#define A3D_A3D_HPP

#include "a3d/calibration.hpp"
#include "a3d/depth.hpp"
#include "a3d/error.hpp"
#include "a3d/image.hpp"
#include "a3d/image_io.hpp"
#include "a3d/inpaint.hpp"
#include "a3d/lut.hpp"
#include "a3d/native.hpp"
#include "a3d/pipeline.hpp"
#include "a3d/quilt.hpp"
#include "a3d/viewsynth.hpp"

#endif  // A3D_A3D_HPP
