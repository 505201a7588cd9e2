// Synthetic photo -> 48-view quilt -> native image, all in memory.
// Usage: demo_photo [calibration.json] [out_dir]

#include <cmath>
#include <filesystem>
#include <iostream>

#include "a3d/a3d.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path out_dir = argc > 2 ? argv[2] : ".";

  a3d::CalibrationProfile profile{52.0, -7.2, 0.15, 1536, 2048};
  if (argc > 1) profile = a3d::load_calibration(argv[1]);

  // a striped backdrop with a disc floating in front of it
  const std::size_t w = 280, h = 210;
  a3d::Image photo(w, h);
  a3d::Grid<double> raw(w, h, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double dx = double(c) - w / 2.0, dy = double(r) - h / 2.0;
      const bool disc = dx * dx + dy * dy < 50.0 * 50.0;
      const std::uint8_t stripe = (c / 12) % 2 ? 200 : 60;
      photo.set(r, c, disc ? a3d::Rgb{230, 80, 40} : a3d::Rgb{stripe, stripe, 120});
      raw(r, c) = disc ? 1.0 : 0.2 * double(r) / h;
    }
  }
  const a3d::DepthMap depth = a3d::normalize_depth(raw);

  a3d::PipelineConfig config;
  config.profile = profile;
  config.spec = {6, 8, static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h)};
  config.max_offset = 6.0;

  const auto table = a3d::build_lut(profile, config.spec);
  const auto result = a3d::render_photo(photo, depth, config, table, "demo");

  fs::create_directories(out_dir);
  a3d::write_png(out_dir / a3d::quilt_file_name("demo", config.spec), result.quilt);
  a3d::write_png(out_dir / "demo_native.png", result.native);
  std::cout << "quilt " << result.quilt.width() << "x" << result.quilt.height()
            << ", native " << result.native.width() << "x" << result.native.height() << "\n";
  return 0;
}
