#ifndef A3D_TEST_HELPERS_HPP
#define A3D_TEST_HELPERS_HPP

#include <gtest/gtest.h>

#include "a3d/error.hpp"

//! Code of the a3d::Error thrown by fn; records a failure if none is thrown.
template <typename Fn>
a3d::Errc code_of(Fn&& fn) {
  try {
    fn();
  } catch (const a3d::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no a3d::Error thrown";
  return a3d::Errc::WriteFailure;
}

#endif  // A3D_TEST_HELPERS_HPP
