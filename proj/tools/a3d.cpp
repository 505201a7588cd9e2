// a3d: photo / views / quilt -> native light-field images for
// slanted-lenticular displays.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "a3d/a3d.hpp"

namespace fs = std::filesystem;
using a3d::Image;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitStage = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string calibration;
  std::optional<double> slant_deg;
  std::uint32_t quilt_cols = 6;
  std::uint32_t quilt_rows = 8;
  std::optional<std::uint32_t> tile_w;
  std::optional<std::uint32_t> tile_h;
  std::optional<std::uint32_t> views;
  std::string mode = "fast";
  std::optional<double> max_offset;
  bool flip_views = false;
  double fov = 60.0;
  double znear = 1.0;
  double zfar = 10.0;
  int inpaint_radius = 3;
  std::string depth;
  std::string model;
  int model_w = 256;
  int model_h = 256;
  bool invert_depth = false;
  std::string map;
  bool build_map = false;
  std::string input;
  std::string quilt;
  std::string out;
  std::string quilt_out;
  std::string mask_dir;
  int iterations = 5;
  unsigned jobs = 0;
  bool verbose = false;
};

void add_calibration(CLI::App* app, Options& o, bool required = true) {
  auto* opt = app->add_option("--calibration", o.calibration, "Display calibration JSON")
                  ->check(CLI::ExistingFile);
  if (required) opt->required();
  app->add_option("--slant-deg", o.slant_deg,
                  "Override the calibration slope with a slant angle in degrees");
}

void add_quilt_layout(CLI::App* app, Options& o) {
  app->add_option("--quilt-cols", o.quilt_cols, "Quilt columns (N)")->check(CLI::PositiveNumber);
  app->add_option("--quilt-rows", o.quilt_rows, "Quilt rows (M)")->check(CLI::PositiveNumber);
  app->add_option("--tile-w", o.tile_w, "Tile width in pixels")->check(CLI::PositiveNumber);
  app->add_option("--tile-h", o.tile_h, "Tile height in pixels")->check(CLI::PositiveNumber);
  app->add_option("--views", o.views, "Total views; must equal cols * rows")
      ->check(CLI::PositiveNumber);
}

void add_synthesis(CLI::App* app, Options& o) {
  app->add_option("--mode", o.mode, "View synthesis: fast | real")
      ->check(CLI::IsMember({"fast", "real"}));
  app->add_option("--max-offset", o.max_offset,
                  "Peak offset: pixels at depth 1 (fast, default 8) or baseline (real, default 0.05)");
  app->add_flag("--flip-views", o.flip_views, "Reverse the view order");
  app->add_option("--fov", o.fov, "Horizontal field of view in degrees (real mode)");
  app->add_option("--znear", o.znear, "Metric depth of relative depth 1 (real mode)");
  app->add_option("--zfar", o.zfar, "Metric depth of relative depth 0 (real mode)");
  app->add_option("--inpaint-radius", o.inpaint_radius, "Telea radius in pixels (real mode)")
      ->check(CLI::PositiveNumber);
  app->add_option("--mask-dir", o.mask_dir, "Write per-view hole masks here (real mode)");
}

void add_depth(CLI::App* app, Options& o) {
  auto* depth = app->add_option("--depth", o.depth, "Depth raster (PNG 8/16-bit or PFM)");
  auto* model = app->add_option("--model", o.model, "ONNX depth network");
  depth->excludes(model);
  app->add_option("--model-size", o.model_w, "Network input width")->check(CLI::PositiveNumber);
  app->add_option("--model-height", o.model_h, "Network input height")->check(CLI::PositiveNumber);
  app->add_flag("--invert-depth", o.invert_depth, "Treat larger raw values as farther");
}

void add_map(CLI::App* app, Options& o) {
  app->add_option("--map", o.map, "LUT .map file (default: cache entry in $A3D_MAP_DIR)");
  app->add_flag("--build-map", o.build_map, "Build and store the map if missing or stale");
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
  app->add_flag("--verbose", o.verbose, "Log progress to stderr");
}

a3d::CalibrationProfile load_profile(const Options& o) {
  auto profile = a3d::run_stage("calibration", o.calibration,
                                [&] { return a3d::load_calibration(o.calibration); });
  if (o.slant_deg) {
    profile.slope = a3d::run_stage("calibration", "--slant-deg",
                                   [&] { return a3d::slope_from_degrees(*o.slant_deg); });
  }
  return profile;
}

a3d::QuiltSpec make_spec(const Options& o, std::uint32_t tile_w, std::uint32_t tile_h) {
  a3d::QuiltSpec spec{o.quilt_cols, o.quilt_rows, tile_w, tile_h};
  if (o.views && *o.views != spec.total_views()) {
    throw UsageError("--views " + std::to_string(*o.views) + " does not match a " +
                     std::to_string(o.quilt_cols) + "x" + std::to_string(o.quilt_rows) + " quilt");
  }
  return spec;
}

a3d::PipelineConfig make_config(const Options& o, const a3d::QuiltSpec& spec) {
  a3d::PipelineConfig c;
  c.profile = load_profile(o);
  c.spec = spec;
  c.mode = o.mode == "real" ? a3d::ViewMode::Real : a3d::ViewMode::Fast;
  c.max_offset = o.max_offset.value_or(c.mode == a3d::ViewMode::Real ? 0.05 : 8.0);
  c.flip_views = o.flip_views;
  c.fov_deg = o.fov;
  c.depth_range = {o.znear, o.zfar};
  c.inpaint_radius = o.inpaint_radius;
  c.jobs = o.jobs;
  if (!o.map.empty()) c.map_path = o.map;
  if (const char* dir = std::getenv("A3D_MAP_DIR"); dir && *dir) c.map_dir = dir;
  c.build_map = o.build_map;
  if (!o.quilt_out.empty()) c.quilt_out = o.quilt_out;
  if (!o.mask_dir.empty()) c.mask_dir = o.mask_dir;
  return c;
}

a3d::DepthProvider make_depth(const Options& o) {
  if (!o.model.empty()) {
    return a3d::DepthProvider::model({o.model, o.model_w, o.model_h}, o.invert_depth);
  }
  if (o.depth.empty()) throw UsageError("one of --depth or --model is required");
  return a3d::DepthProvider::file(o.depth, o.invert_depth);
}

std::uint32_t tile_or(const std::optional<std::uint32_t>& v, std::size_t fallback) {
  return v ? *v : static_cast<std::uint32_t>(fallback);
}

int run_lut(const Options& o) {
  if (!o.tile_w || !o.tile_h) throw UsageError("lut needs --tile-w and --tile-h");
  const auto profile = load_profile(o);
  const auto spec = make_spec(o, *o.tile_w, *o.tile_h);
  const auto table = a3d::run_stage("lut", o.calibration, [&] {
    return a3d::build_lut(profile, spec, o.jobs);
  });
  a3d::run_stage("write", o.out, [&] { a3d::save_lut(o.out, table); });
  if (o.verbose) {
    std::cerr << "wrote " << o.out << ": native " << table.native_width_px << "x"
              << table.native_height_px << ", quilt " << table.quilt_width_px << "x"
              << table.quilt_height_px << "\n";
  }
  return 0;
}

int run_photo(const Options& o) {
  const Image probe = a3d::run_stage("load-image", o.input, [&] { return a3d::read_png(o.input); });
  const auto spec = make_spec(o, tile_or(o.tile_w, probe.width()), tile_or(o.tile_h, probe.height()));
  auto config = make_config(o, spec);
  const auto result = a3d::photo_to_native(o.input, make_depth(o), config, o.out);
  if (o.verbose) {
    std::cerr << "quilt " << result.quilt.width() << "x" << result.quilt.height() << ", native "
              << result.native.width() << "x" << result.native.height() << " -> " << o.out << "\n";
  }
  return 0;
}

int run_views(const Options& o) {
  std::uint32_t tw = 0, th = 0;
  if (o.tile_w && o.tile_h) {
    tw = *o.tile_w;
    th = *o.tile_h;
  } else {
    const auto files = a3d::run_stage("load-views", o.input, [&] { return a3d::list_pngs(o.input); });
    if (files.empty()) throw UsageError("no PNG views in '" + o.input + "'");
    const auto first = a3d::run_stage("load-views", files.front().string(),
                                      [&] { return a3d::read_png(files.front()); });
    tw = tile_or(o.tile_w, first.width());
    th = tile_or(o.tile_h, first.height());
  }
  const auto config = make_config(o, make_spec(o, tw, th));
  a3d::views_to_native(o.input, config, o.out);
  return 0;
}

int run_quilt(const Options& o) {
  if (o.map.empty()) throw UsageError("quilt needs --map");
  a3d::quilt_to_native(o.quilt, o.map, o.out, o.jobs);
  return 0;
}

int run_frames(const Options& o) {
  const auto frames = a3d::run_stage("load-frames", o.input, [&] { return a3d::list_pngs(o.input); });
  std::uint32_t tw = o.tile_w.value_or(0), th = o.tile_h.value_or(0);
  if (!frames.empty() && (!o.tile_w || !o.tile_h)) {
    const auto first = a3d::run_stage("load-frames", frames.front().string(),
                                      [&] { return a3d::read_png(frames.front()); });
    tw = tile_or(o.tile_w, first.width());
    th = tile_or(o.tile_h, first.height());
  }
  const auto config = make_config(o, make_spec(o, std::max(tw, 1u), std::max(th, 1u)));
  a3d::FrameDepthSource depth;
  depth.invert = o.invert_depth;
  if (!o.model.empty()) {
    depth.model = make_depth(o);
  } else if (!o.depth.empty()) {
    depth.depth_dir = o.depth;
  } else {
    throw UsageError("frames needs --depth <dir> or --model <file>");
  }
  const auto report = a3d::frames_to_native_frames(o.input, depth, config, o.out);
  std::cout << report.summary() << "\n";
  return 0;
}

int run_quilt2frames(const Options& o, bool grid_given) {
  Options local = o;
  if (!grid_given) {
    if (const auto grid = a3d::parse_quilt_file_name(fs::path(o.quilt).filename().string())) {
      local.quilt_cols = grid->first;
      local.quilt_rows = grid->second;
    }
  }
  const Image quilt = a3d::run_stage("load-quilt", o.quilt, [&] { return a3d::read_png(o.quilt); });
  if (quilt.width() % local.quilt_cols != 0 || quilt.height() % local.quilt_rows != 0) {
    throw a3d::StageError("extract", o.quilt,
                          a3d::Error(a3d::Errc::DimensionMismatch,
                                     "quilt " + std::to_string(quilt.width()) + "x" +
                                         std::to_string(quilt.height()) + " is not divisible into " +
                                         std::to_string(local.quilt_cols) + "x" +
                                         std::to_string(local.quilt_rows) + " tiles"));
  }
  const auto spec = make_spec(local,
                              tile_or(o.tile_w, quilt.width() / local.quilt_cols),
                              tile_or(o.tile_h, quilt.height() / local.quilt_rows));
  const auto written = a3d::quilt_views_to_video_frames(o.quilt, spec, o.out);
  if (o.verbose) std::cerr << "wrote " << written.size() << " frames to " << o.out << "\n";
  return 0;
}

int run_bench(const Options& o) {
  const auto profile = load_profile(o);
  std::optional<a3d::Image> quilt;
  if (!o.quilt.empty()) {
    quilt = a3d::run_stage("load-quilt", o.quilt, [&] { return a3d::read_png(o.quilt); });
  }
  const auto spec = make_spec(o, tile_or(o.tile_w, quilt ? quilt->width() / o.quilt_cols : 560),
                              tile_or(o.tile_h, quilt ? quilt->height() / o.quilt_rows : 420));
  if (!quilt) {
    quilt = a3d::Image(spec.width(), spec.height());
    std::mt19937 rng(7);
    for (auto& b : quilt->bytes()) b = static_cast<std::uint8_t>(rng());
  }
  const auto table = !o.map.empty()
                         ? a3d::run_stage("map", o.map, [&] { return a3d::load_lut(o.map); })
                         : a3d::build_lut(profile, spec, o.jobs);
  const auto report = a3d::run_stage("bench", o.calibration, [&] {
    return a3d::benchmark_render(*quilt, table, profile, spec, o.iterations, o.jobs);
  });
  if (o.verbose) std::cerr << "lut_ms,direct_ms,ratio\n";
  std::cout << report.csv() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"a3d: single image to light-field native images for lenticular displays"};
  app.require_subcommand(1);
  Options o;

  auto* lut = app.add_subcommand("lut", "Precompute the subpixel lookup table (.map)");
  add_calibration(lut, o);
  add_quilt_layout(lut, o);
  lut->add_option("--out", o.out, "Output .map path")->required();
  add_common(lut, o);

  auto* photo = app.add_subcommand("photo", "Photo + depth -> quilt -> native");
  photo->add_option("--input", o.input, "Input RGB PNG")->required()->check(CLI::ExistingFile);
  add_calibration(photo, o);
  add_quilt_layout(photo, o);
  add_synthesis(photo, o);
  add_depth(photo, o);
  add_map(photo, o);
  photo->add_option("--out", o.out, "Native PNG")->required();
  photo->add_option("--quilt-out", o.quilt_out, "Also write the quilt PNG");
  add_common(photo, o);

  auto* views = app.add_subcommand("views", "Directory of sorted views -> native");
  views->add_option("--input", o.input, "Directory of view PNGs")->required()->check(CLI::ExistingDirectory);
  add_calibration(views, o);
  add_quilt_layout(views, o);
  add_map(views, o);
  views->add_option("--out", o.out, "Native PNG")->required();
  views->add_option("--quilt-out", o.quilt_out, "Also write the quilt PNG");
  add_common(views, o);

  auto* quilt = app.add_subcommand("quilt", "Quilt PNG + map -> native");
  quilt->alias("native");
  quilt->add_option("--quilt", o.quilt, "Quilt PNG")->required()->check(CLI::ExistingFile);
  quilt->add_option("--map", o.map, "LUT .map file")->required()->check(CLI::ExistingFile);
  quilt->add_option("--out", o.out, "Native PNG")->required();
  add_common(quilt, o);

  auto* frames = app.add_subcommand("frames", "Numbered frames -> native frames");
  frames->add_option("--input", o.input, "Directory of frame PNGs")->required()->check(CLI::ExistingDirectory);
  add_calibration(frames, o);
  add_quilt_layout(frames, o);
  add_synthesis(frames, o);
  add_depth(frames, o);
  add_map(frames, o);
  frames->add_option("--out", o.out, "Output directory")->required();
  add_common(frames, o);

  auto* q2f = app.add_subcommand("quilt2frames", "Quilt -> numbered view frames");
  q2f->add_option("--quilt", o.quilt, "Quilt PNG")->required()->check(CLI::ExistingFile);
  add_quilt_layout(q2f, o);
  q2f->add_option("--out", o.out, "Output directory")->required();
  add_common(q2f, o);

  auto* bench = app.add_subcommand("bench", "Time LUT vs direct native rendering");
  add_calibration(bench, o);
  add_quilt_layout(bench, o);
  bench->add_option("--quilt", o.quilt, "Quilt PNG (default: random)")->check(CLI::ExistingFile);
  bench->add_option("--map", o.map, "LUT .map file (default: built in memory)")->check(CLI::ExistingFile);
  bench->add_option("--iterations", o.iterations, "Timed runs per path")->check(CLI::Range(3, 1000));
  add_common(bench, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*lut) return run_lut(o);
    if (*photo) return run_photo(o);
    if (*views) return run_views(o);
    if (*quilt) return run_quilt(o);
    if (*frames) return run_frames(o);
    if (*q2f) return run_quilt2frames(o, q2f->count("--quilt-cols") + q2f->count("--quilt-rows") > 0);
    if (*bench) return run_bench(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const a3d::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitUsage;
}
