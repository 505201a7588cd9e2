#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using a3d::Errc;
using a3d::Image;

namespace {

a3d::CalibrationProfile small_profile() {
  a3d::CalibrationProfile p;
  p.pitch_px = 7.3;
  p.slope = -2.4;
  p.center_offset = 0.2;
  p.screen_width_px = 48;
  p.screen_height_px = 40;
  p.subpixels_per_pixel = 3;
  return p;
}

a3d::PipelineConfig small_config(const fs::path& dir) {
  a3d::PipelineConfig c;
  c.profile = small_profile();
  c.spec = {3, 2, 12, 10};
  c.max_offset = 2.0;
  c.map_dir = dir;
  c.build_map = true;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + A3D_CLI_PATH + "\" " + args + " > \"" + log.string() +
                          "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

template <typename Fn>
a3d::StageError stage_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const a3d::StageError& e) {
    return e;
  }
  ADD_FAILURE() << "no StageError thrown";
  return a3d::StageError("", "", a3d::Error(Errc::InvalidValue, ""));
}

}  // namespace

TEST(Pipeline, SingleViewNativeMatchesOracle) {
  const auto dir = oracle::temp_dir("pipe_single");
  std::mt19937 rng(31);
  auto config = small_config(dir);
  config.spec = {1, 1, 16, 12};
  const Image input = oracle::random_image(40, 30, rng);
  const a3d::DepthMap depth(a3d::Grid<double>(16, 12, 0.3));
  const auto table = a3d::resolve_map(config);
  const auto result = a3d::render_photo(input, depth, config, table);
  const Image tile = a3d::resize_bilinear(input, 16, 12);
  EXPECT_EQ(result.quilt, tile);
  EXPECT_EQ(result.native, oracle::native(tile, config.profile, config.spec));
}

TEST(Pipeline, MissingMapNamesThePath) {
  const auto dir = oracle::temp_dir("pipe_missing");
  auto config = small_config(dir);
  config.build_map = false;
  const auto e = stage_error_of([&] { a3d::resolve_map(config); });
  EXPECT_EQ(e.code(), Errc::MapNotFound);
  EXPECT_EQ(e.stage(), "map");
  EXPECT_NE(std::string(e.what()).find(a3d::default_map_path(config).string()), std::string::npos);
}

TEST(Pipeline, BuildMapWritesCacheAndStaleMapRejected) {
  const auto dir = oracle::temp_dir("pipe_cache");
  auto config = small_config(dir);
  const auto table = a3d::resolve_map(config);
  const fs::path cached = a3d::default_map_path(config);
  ASSERT_TRUE(fs::exists(cached));
  EXPECT_EQ(cached.parent_path(), dir);
  EXPECT_EQ(a3d::load_lut(cached), table);

  // same file pointed at by a different layout
  auto other = config;
  other.spec = {2, 3, 12, 10};
  other.map_path = cached;
  other.build_map = false;
  EXPECT_EQ(code_of([&] { a3d::resolve_map(other); }), Errc::StaleMap);
  other.build_map = true;
  const auto rebuilt = a3d::resolve_map(other);
  EXPECT_TRUE(a3d::matches(rebuilt, other.profile, other.spec));
  EXPECT_NE(a3d::map_cache_key(config.profile, config.spec), a3d::map_cache_key(other.profile, other.spec));
}

TEST(Pipeline, ViewsDirectoryToNative) {
  const auto dir = oracle::temp_dir("pipe_views");
  const auto config = small_config(dir);
  std::mt19937 rng(32);
  std::vector<Image> views;
  fs::create_directories(dir / "views");
  // written in reverse so directory order differs from name order
  for (int v = 0; v < 6; ++v) views.push_back(oracle::random_image(12, 10, rng));
  for (int v = 5; v >= 0; --v) a3d::write_png(dir / "views" / ("view_" + std::to_string(v) + ".png"), views[v]);
  const Image native = a3d::views_to_native(dir / "views", config, dir / "native.png");
  const Image quilt = a3d::assemble_quilt(views, config.spec);
  EXPECT_EQ(native, oracle::native(quilt, config.profile, config.spec));
  EXPECT_EQ(a3d::read_png(dir / "native.png"), native);
}

TEST(Pipeline, ViewsWrongCount) {
  const auto dir = oracle::temp_dir("pipe_views_count");
  const auto config = small_config(dir);
  fs::create_directories(dir / "views");
  for (int v = 0; v < 5; ++v) a3d::write_png(dir / "views" / ("v" + std::to_string(v) + ".png"), Image(12, 10));
  const auto e = stage_error_of([&] { a3d::views_to_native(dir / "views", config, dir / "n.png"); });
  EXPECT_EQ(e.code(), Errc::WrongViewCount);
  EXPECT_EQ(e.stage(), "load-views");
}

TEST(Pipeline, ListPngsIsLexicographic) {
  const auto dir = oracle::temp_dir("pipe_list");
  for (const char* name : {"b.png", "a10.png", "a2.PNG", "z.txt"}) std::ofstream(dir / name) << "x";
  const auto files = a3d::list_pngs(dir);
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "a10.png");
  EXPECT_EQ(files[1].filename(), "a2.PNG");
  EXPECT_EQ(files[2].filename(), "b.png");
}

TEST(Pipeline, QuiltAndMapToNative) {
  const auto dir = oracle::temp_dir("pipe_quilt");
  const auto config = small_config(dir);
  std::mt19937 rng(33);
  const Image quilt = oracle::random_image(config.spec.width(), config.spec.height(), rng);
  a3d::write_png(dir / "q.png", quilt);
  a3d::save_lut(dir / "m.map", a3d::build_lut(config.profile, config.spec));
  const Image native = a3d::quilt_to_native(dir / "q.png", dir / "m.map", dir / "n.png");
  EXPECT_EQ(native, oracle::native(quilt, config.profile, config.spec));
  const auto e = stage_error_of([&] { a3d::quilt_to_native(dir / "q.png", dir / "absent.map", dir / "n.png"); });
  EXPECT_EQ(e.stage(), "map");
  EXPECT_EQ(e.code(), Errc::UnreadableInput);
}

TEST(Pipeline, PhotoFilesFastAndRealDeterministic) {
  const auto dir = oracle::temp_dir("pipe_photo");
  std::mt19937 rng(34);
  a3d::write_png(dir / "in.png", oracle::textured(36, 30));
  a3d::Grid<double> g(36, 30);
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t c = 0; c < 36; ++c) g(r, c) = (c > 12 && c < 24) ? 255.0 : 40.0;
  a3d::write_gray_png(dir / "d.png", g, 8);
  for (const auto mode : {a3d::ViewMode::Fast, a3d::ViewMode::Real}) {
    auto config = small_config(dir);
    config.mode = mode;
    config.max_offset = mode == a3d::ViewMode::Fast ? 2.0 : 0.05;
    config.quilt_out = dir / "q1.png";
    config.mask_dir = dir / "masks";
    const auto provider = a3d::DepthProvider::file(dir / "d.png");
    const auto a = a3d::photo_to_native(dir / "in.png", provider, config, dir / "n1.png");
    config.quilt_out = dir / "q2.png";
    config.jobs = 3;
    const auto b = a3d::photo_to_native(dir / "in.png", provider, config, dir / "n2.png");
    EXPECT_EQ(slurp(dir / "n1.png"), slurp(dir / "n2.png"));
    EXPECT_EQ(slurp(dir / "q1.png"), slurp(dir / "q2.png"));
    EXPECT_EQ(a.native.width(), 48u);
    EXPECT_EQ(a.native.height(), 40u);
    EXPECT_EQ(a.quilt.width(), 36u);
    EXPECT_EQ(a.quilt.height(), 20u);
    if (mode == a3d::ViewMode::Real) {
      EXPECT_EQ(a.masks.size(), 6u);
      EXPECT_TRUE(fs::exists(dir / "masks" / "mask_0005.png"));
    } else {
      EXPECT_TRUE(a.masks.empty());
    }
  }
}

TEST(Pipeline, StageNamesOnFailure) {
  const auto dir = oracle::temp_dir("pipe_stage");
  const auto config = small_config(dir);
  const auto provider = a3d::DepthProvider::file(dir / "nope.png");
  auto e = stage_error_of([&] { a3d::photo_to_native(dir / "absent.png", provider, config, dir / "o.png"); });
  EXPECT_EQ(e.stage(), "load-image");
  EXPECT_EQ(e.input(), (dir / "absent.png").string());
  a3d::write_png(dir / "in.png", Image(20, 20));
  e = stage_error_of([&] { a3d::photo_to_native(dir / "in.png", provider, config, dir / "o.png"); });
  EXPECT_EQ(e.stage(), "depth");
  EXPECT_EQ(e.code(), Errc::UnreadableInput);
  EXPECT_NE(std::string(e.what()).find("stage 'depth' failed on"), std::string::npos);
}

TEST(Pipeline, FramesKeepNamesAndReport) {
  const auto dir = oracle::temp_dir("pipe_frames");
  auto config = small_config(dir);
  config.jobs = 2;
  std::mt19937 rng(35);
  fs::create_directories(dir / "in");
  fs::create_directories(dir / "depth");
  for (int i = 0; i < 10; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f%03d.png", i);
    a3d::write_png(dir / "in" / name, oracle::random_image(24, 20, rng));
    a3d::write_gray_png(dir / "depth" / name, a3d::Grid<double>(24, 20, 10.0 * i), 8);
  }
  const auto report = a3d::frames_to_native_frames(dir / "in", {dir / "depth", {}, false}, config, dir / "out");
  EXPECT_EQ(report.frames, 10u);
  EXPECT_GT(report.fps, 0.0);
  EXPECT_NE(report.summary().find("frames=10"), std::string::npos);
  const auto out = a3d::list_pngs(dir / "out");
  ASSERT_EQ(out.size(), 10u);
  EXPECT_EQ(out[3].filename(), "f003.png");
  // each output equals the single-photo pipeline on that frame
  const auto one = a3d::photo_to_native(dir / "in" / "f007.png",
                                        a3d::DepthProvider::file(dir / "depth" / "f007.png"), config,
                                        dir / "single.png");
  EXPECT_EQ(a3d::read_png(dir / "out" / "f007.png"), one.native);
}

TEST(Pipeline, FramesErrors) {
  const auto dir = oracle::temp_dir("pipe_frames_err");
  const auto config = small_config(dir);
  fs::create_directories(dir / "empty");
  EXPECT_EQ(code_of([&] { a3d::frames_to_native_frames(dir / "empty", {dir / "empty", {}, false}, config, dir / "o"); }),
            Errc::NoFrames);

  fs::create_directories(dir / "in");
  fs::create_directories(dir / "depth");
  for (int i = 0; i < 4; ++i) {
    const std::string name = "f" + std::to_string(i) + ".png";
    a3d::write_png(dir / "in" / name, Image(24, 20));
    a3d::write_gray_png(dir / "depth" / name, a3d::Grid<double>(24, 20, 1.0), 8);
  }
  std::ofstream(dir / "in" / "f2.png", std::ios::trunc) << "broken";
  const auto e = stage_error_of(
      [&] { a3d::frames_to_native_frames(dir / "in", {dir / "depth", {}, false}, config, dir / "o"); });
  EXPECT_EQ(e.stage(), "frame 2");
  EXPECT_EQ(e.code(), Errc::UnreadableInput);
}

TEST(Pipeline, QuiltToVideoFrames) {
  const auto dir = oracle::temp_dir("pipe_q2f");
  std::mt19937 rng(36);
  const a3d::QuiltSpec spec{6, 8, 10, 7};
  std::vector<Image> views;
  for (int v = 0; v < 48; ++v) views.push_back(oracle::random_image(10, 7, rng));
  a3d::write_png(dir / "s_qs6x8.png", a3d::assemble_quilt(views, spec));
  const auto written = a3d::quilt_views_to_video_frames(dir / "s_qs6x8.png", spec, dir / "frames");
  ASSERT_EQ(written.size(), 48u);
  EXPECT_EQ(written[0].filename(), "frame_0000.png");
  EXPECT_EQ(written[47].filename(), "frame_0047.png");
  for (int v = 0; v < 48; ++v) EXPECT_EQ(a3d::read_png(written[v]), views[v]);
  const a3d::QuiltSpec wrong{6, 8, 11, 7};
  EXPECT_EQ(code_of([&] { a3d::quilt_views_to_video_frames(dir / "s_qs6x8.png", wrong, dir / "x"); }),
            Errc::DimensionMismatch);
}

TEST(Cli, ExitCodesAndVerbs) {
  const auto dir = oracle::temp_dir("cli");
  const auto p = small_profile();
  std::ofstream(dir / "cal.json") << a3d::serialize_calibration(p);
  const std::string cal = "--calibration \"" + (dir / "cal.json").string() + "\"";
  const std::string layout = " --quilt-cols 3 --quilt-rows 2 --tile-w 12 --tile-h 10";
  const fs::path log = dir / "log.txt";

  EXPECT_EQ(run_cli("", log), 2);
  EXPECT_EQ(run_cli("nonsense", log), 2);
  EXPECT_EQ(run_cli("lut " + cal + layout + " --views 5 --out x.map", log), 2);

  ASSERT_EQ(run_cli("lut " + cal + layout + " --out \"" + (dir / "m.map").string() + "\"", log), 0)
      << slurp(log);
  EXPECT_EQ(a3d::load_lut(dir / "m.map"), a3d::build_lut(p, {3, 2, 12, 10}));

  std::mt19937 rng(37);
  const Image quilt = oracle::random_image(36, 20, rng);
  a3d::write_png(dir / "s_qs3x2.png", quilt);
  ASSERT_EQ(run_cli("quilt --quilt \"" + (dir / "s_qs3x2.png").string() + "\" --map \"" +
                        (dir / "m.map").string() + "\" --out \"" + (dir / "n.png").string() + "\"",
                    log),
            0)
      << slurp(log);
  EXPECT_EQ(a3d::read_png(dir / "n.png"), oracle::native(quilt, p, {3, 2, 12, 10}));
  EXPECT_EQ(run_cli("native --quilt \"" + (dir / "s_qs3x2.png").string() + "\" --map \"" +
                        (dir / "m.map").string() + "\" --out \"" + (dir / "n2.png").string() + "\"",
                    log),
            0);

  // grid inferred from the _qsNxM suffix; tile size from the raster
  ASSERT_EQ(run_cli("quilt2frames --quilt \"" + (dir / "s_qs3x2.png").string() + "\" --out \"" +
                        (dir / "frames").string() + "\"",
                    log),
            0)
      << slurp(log);
  EXPECT_EQ(a3d::list_pngs(dir / "frames").size(), 6u);
  EXPECT_EQ(a3d::read_png(dir / "frames" / "frame_0004.png"), a3d::extract_tile(quilt, {3, 2, 12, 10}, 4));

  // runtime failure: map missing from the cache directory
  a3d::write_png(dir / "in.png", Image(20, 20));
  a3d::write_gray_png(dir / "d.png", a3d::Grid<double>(20, 20, 3.0), 8);
  const std::string photo = "photo " + cal + layout + " --input \"" + (dir / "in.png").string() +
                            "\" --depth \"" + (dir / "d.png").string() + "\" --out \"" +
                            (dir / "p.png").string() + "\"";
  EXPECT_EQ(run_cli("--help", log), 0);
  EXPECT_EQ(run_cli(photo + " --map \"" + (dir / "absent.map").string() + "\"", log), 3);
  EXPECT_NE(slurp(log).find("absent.map"), std::string::npos);
  EXPECT_EQ(run_cli(photo + " --map \"" + (dir / "m.map").string() + "\"", log), 0) << slurp(log);
  EXPECT_EQ(a3d::read_png(dir / "p.png").width(), 48u);
}

TEST(Cli, BenchPrintsCsv) {
  const auto dir = oracle::temp_dir("cli_bench");
  std::ofstream(dir / "cal.json") << a3d::serialize_calibration(small_profile());
  const fs::path log = dir / "log.txt";
  ASSERT_EQ(run_cli("bench --calibration \"" + (dir / "cal.json").string() +
                        "\" --quilt-cols 3 --quilt-rows 2 --tile-w 12 --tile-h 10 --iterations 3",
                    log),
            0)
      << slurp(log);
  const std::string out = slurp(log);
  EXPECT_EQ(std::count(out.begin(), out.end(), ','), 2) << out;
  EXPECT_EQ(run_cli("bench --calibration \"" + (dir / "cal.json").string() + "\" --iterations 2", log), 2);
}
