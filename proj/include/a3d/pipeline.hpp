#ifndef A3D_PIPELINE_HPP
#define A3D_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "a3d/calibration.hpp"
#include "a3d/depth.hpp"
#include "a3d/error.hpp"
#include "a3d/image.hpp"
#include "a3d/image_io.hpp"
#include "a3d/inpaint.hpp"
#include "a3d/lut.hpp"
#include "a3d/native.hpp"
#include "a3d/quilt.hpp"
#include "a3d/viewsynth.hpp"

namespace a3d {

namespace fs = std::filesystem;

struct PipelineConfig {
  CalibrationProfile profile;
  QuiltSpec spec;
  ViewMode mode = ViewMode::Fast;
  double max_offset = 8.0;
  bool flip_views = false;
  double fov_deg = 60.0;
  DepthRange depth_range;
  int inpaint_radius = 3;
  unsigned jobs = 0;

  std::optional<fs::path> map_path;  // explicit .map; otherwise the cache dir
  fs::path map_dir = ".";
  bool build_map = false;            // build and store a missing map

  std::optional<fs::path> quilt_out; // also write the quilt here
  std::optional<fs::path> mask_dir;  // Real mode: write per-view hole masks

  ViewRequest view_request() const {
    return {spec.total_views(), max_offset, mode, flip_views};
  }
};

//! Runs `fn`, re-raising any library Error tagged with the stage and input.
template <typename Fn>
auto run_stage(const std::string& stage, const std::string& input, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, input, e);
  }
}

//! Hex FNV-1a 64 over the canonical calibration text and the quilt layout.
inline std::string map_cache_key(const CalibrationProfile& profile, const QuiltSpec& spec) {
  const std::string text = serialize_calibration(profile) + "|" +
                           std::to_string(spec.grid_cols) + "x" + std::to_string(spec.grid_rows) +
                           "|" + std::to_string(spec.tile_width_px) + "x" +
                           std::to_string(spec.tile_height_px);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline fs::path default_map_path(const PipelineConfig& config) {
  return config.map_dir / ("a3d-" + map_cache_key(config.profile, config.spec) + ".map");
}

//! Loads the map for (profile, spec): the explicit path if given, else the
//! cache entry. Missing maps are built only when build_map is set; a map
//! whose header disagrees with the configuration is rejected (or rebuilt).
inline LookupTable resolve_map(const PipelineConfig& config) {
  const fs::path path = config.map_path.value_or(default_map_path(config));
  return run_stage("map", path.string(), [&] {
    std::error_code ec;
    if (fs::exists(path, ec)) {
      LookupTable table = load_lut(path);
      if (matches(table, config.profile, config.spec)) return table;
      if (!config.build_map) {
        throw Error(Errc::StaleMap, "map '" + path.string() +
                                        "' was built for a different device or quilt layout");
      }
    } else if (!config.build_map) {
      throw Error(Errc::MapNotFound,
                  "expected map at '" + path.string() + "' (run `a3d lut` or pass --build-map)");
    }
    LookupTable table = build_lut(config.profile, config.spec, config.jobs);
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    save_lut(path, table);
    return table;
  });
}

struct PhotoResult {
  Image quilt;
  Image native;
  std::vector<HoleMask> masks;  // Real mode only
};

//! In-memory photo pipeline: synthesize views, assemble, render.
inline PhotoResult render_photo(const Image& input, const DepthMap& depth,
                                const PipelineConfig& config, const LookupTable& table,
                                const std::string& name = "image") {
  const auto& spec = config.spec;
  validate(spec);
  const Image tile = run_stage("resize", name, [&] {
    return resize_bilinear(input, spec.tile_width_px, spec.tile_height_px);
  });
  PhotoResult result;
  const ViewRequest request = config.view_request();
  std::vector<Image> views = run_stage("synthesize", name, [&] {
    if (config.mode == ViewMode::Fast) return synthesize_fast(tile, depth, request, config.jobs);
    RealSynthesisOptions options;
    options.k_o = intrinsics_from_fov(config.fov_deg, tile.width(), tile.height());
    options.k_v = options.k_o;
    options.depth_range = config.depth_range;
    options.inpaint_radius = config.inpaint_radius;
    return synthesize_real(tile, depth, request, options, config.jobs, &result.masks);
  });
  result.quilt = run_stage("quilt", name, [&] { return assemble_quilt(views, spec); });
  result.native = run_stage("render", name, [&] {
    return render_native_lut(result.quilt, table, config.jobs);
  });
  return result;
}

//! photo -> quilt -> native, reading and writing files.
inline PhotoResult photo_to_native(const fs::path& image_path, const DepthProvider& depth_source,
                                   const PipelineConfig& config, const fs::path& native_out,
                                   const LookupTable* preloaded = nullptr) {
  const std::string name = image_path.string();
  const Image input = run_stage("load-image", name, [&] { return read_png(image_path); });
  const DepthMap depth = run_stage("depth", name, [&] {
    return load_depth(depth_source, config.spec.tile_width_px, config.spec.tile_height_px, &input);
  });
  std::optional<LookupTable> owned;
  if (!preloaded) owned = resolve_map(config);
  const LookupTable& table = preloaded ? *preloaded : *owned;
  PhotoResult result = render_photo(input, depth, config, table, name);
  run_stage("write", native_out.string(), [&] {
    write_png(native_out, result.native);
    if (config.quilt_out) write_png(*config.quilt_out, result.quilt);
    if (config.mask_dir && !result.masks.empty()) {
      std::error_code ec;
      fs::create_directories(*config.mask_dir, ec);
      if (ec) throw Error(Errc::WriteFailure, "cannot create '" + config.mask_dir->string() + "'");
      for (std::size_t v = 0; v < result.masks.size(); ++v) {
        const auto& m = result.masks[v];
        Grid<double> g(m.width(), m.height());
        for (std::size_t r = 0; r < m.height(); ++r) {
          for (std::size_t c = 0; c < m.width(); ++c) g(r, c) = m(r, c) ? 255.0 : 0.0;
        }
        char file[32];
        std::snprintf(file, sizeof file, "mask_%04zu.png", v);
        write_gray_png(*config.mask_dir / file, g);
      }
    }
  });
  return result;
}

//! Sorted (lexicographic) list of *.png files in a directory.
inline std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(Errc::UnreadableInput, "'" + dir.string() + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  return files;
}

//! Sorted N-views directory -> native. No synthesis.
inline Image views_to_native(const fs::path& dir, const PipelineConfig& config,
                             const fs::path& native_out) {
  const auto files = run_stage("load-views", dir.string(), [&] {
    auto f = list_pngs(dir);
    if (f.size() != config.spec.total_views()) {
      throw Error(Errc::WrongViewCount, "found " + std::to_string(f.size()) + " views, expected " +
                                            std::to_string(config.spec.total_views()));
    }
    return f;
  });
  std::vector<Image> views;
  views.reserve(files.size());
  for (const auto& f : files) {
    views.push_back(run_stage("load-views", f.string(), [&] { return read_png(f); }));
  }
  const Image quilt = run_stage("quilt", dir.string(), [&] { return assemble_quilt(views, config.spec); });
  const LookupTable table = resolve_map(config);
  Image native = run_stage("render", dir.string(), [&] {
    return render_native_lut(quilt, table, config.jobs);
  });
  run_stage("write", native_out.string(), [&] {
    write_png(native_out, native);
    if (config.quilt_out) write_png(*config.quilt_out, quilt);
  });
  return native;
}

//! Quilt PNG + .map -> native PNG.
inline Image quilt_to_native(const fs::path& quilt_path, const fs::path& map_path,
                             const fs::path& native_out, unsigned jobs = 0) {
  const LookupTable table = run_stage("map", map_path.string(), [&] { return load_lut(map_path); });
  const Image quilt = run_stage("load-quilt", quilt_path.string(), [&] { return read_png(quilt_path); });
  Image native = run_stage("render", quilt_path.string(), [&] {
    return render_native_lut(quilt, table, jobs);
  });
  run_stage("write", native_out.string(), [&] { write_png(native_out, native); });
  return native;
}

//! Zero-padded frame file name, at least four digits.
inline std::string frame_file_name(std::size_t index, std::size_t count) {
  const std::size_t digits = std::max<std::size_t>(4, std::to_string(count > 0 ? count - 1 : 0).size());
  std::string n = std::to_string(index);
  return "frame_" + std::string(digits - std::min(digits, n.size()), '0') + n + ".png";
}

//! Quilt -> one PNG per view, in view order.
inline std::vector<fs::path> quilt_views_to_video_frames(const fs::path& quilt_path,
                                                         const QuiltSpec& spec,
                                                         const fs::path& out_dir) {
  const Image quilt = run_stage("load-quilt", quilt_path.string(), [&] { return read_png(quilt_path); });
  return run_stage("extract", quilt_path.string(), [&] {
    std::vector<fs::path> written;
    std::vector<Image> tiles;
    for (std::uint32_t v = 0; v < spec.total_views(); ++v) tiles.push_back(extract_tile(quilt, spec, v));
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::WriteFailure, "cannot create '" + out_dir.string() + "'");
    for (std::uint32_t v = 0; v < spec.total_views(); ++v) {
      written.push_back(out_dir / frame_file_name(v, spec.total_views()));
      write_png(written.back(), tiles[v]);
    }
    return written;
  });
}

//! Per-frame depth: a directory of depth rasters paired with the frames in
//! sorted order, or a model provider run on every frame.
struct FrameDepthSource {
  std::optional<fs::path> depth_dir;
  std::optional<DepthProvider> model;
  bool invert = false;
};

struct FramesReport {
  std::size_t frames = 0;
  double seconds = 0.0;
  double fps = 0.0;

  std::string summary() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "frames=%zu seconds=%.3f fps=%.2f", frames, seconds, fps);
    return buf;
  }
};

//! Applies the photo pipeline to every numbered frame. Output frames keep
//! the input file names. The map is resolved once up front.
inline FramesReport frames_to_native_frames(const fs::path& in_dir, const FrameDepthSource& depth,
                                            const PipelineConfig& config, const fs::path& out_dir) {
  const auto frames = run_stage("load-frames", in_dir.string(), [&] { return list_pngs(in_dir); });
  if (frames.empty()) {
    throw StageError("load-frames", in_dir.string(),
                     Error(Errc::NoFrames, "no PNG frames in '" + in_dir.string() + "'"));
  }
  std::vector<fs::path> depth_files;
  if (depth.depth_dir) {
    depth_files = run_stage("depth", depth.depth_dir->string(), [&] {
      auto files = list_pngs(*depth.depth_dir);
      std::error_code ec;
      for (const auto& entry : fs::directory_iterator(*depth.depth_dir, ec)) {
        if (entry.path().extension() == ".pfm") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
      });
      if (files.size() != frames.size()) {
        throw Error(Errc::UnreadableInput, std::to_string(files.size()) + " depth frames for " +
                                               std::to_string(frames.size()) + " frames");
      }
      return files;
    });
  } else if (!depth.model) {
    throw StageError("depth", in_dir.string(),
                     Error(Errc::ProviderUnavailable, "frames need a depth directory or a model"));
  }

  const LookupTable table = resolve_map(config);
  run_stage("write", out_dir.string(), [&] {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::WriteFailure, "cannot create '" + out_dir.string() + "'");
  });

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_jobs(config.jobs), frames.size()));
  PipelineConfig frame_config = config;
  frame_config.quilt_out.reset();
  frame_config.mask_dir.reset();
  if (workers > 1) frame_config.jobs = 1;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::optional<std::size_t> failed_index;
  std::optional<StageError> first_error;

  auto work = [&] {
    for (std::size_t i = next++; i < frames.size() && !failed; i = next++) {
      try {
        const DepthProvider provider = depth.depth_dir
                                           ? DepthProvider::file(depth_files[i], depth.invert)
                                           : *depth.model;
        photo_to_native(frames[i], provider, frame_config, out_dir / frames[i].filename(), &table);
      } catch (const Error& e) {
        std::lock_guard lock(error_mutex);
        failed = true;
        if (!failed_index || i < *failed_index) {
          failed_index = i;
          first_error.emplace("frame " + std::to_string(i), frames[i].string(), e);
        }
      }
    }
  };

  const auto t0 = std::chrono::steady_clock::now();
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  const auto t1 = std::chrono::steady_clock::now();
  if (first_error) throw *first_error;

  FramesReport report;
  report.frames = frames.size();
  report.seconds = std::chrono::duration<double>(t1 - t0).count();
  report.fps = report.seconds > 0.0 ? static_cast<double>(report.frames) / report.seconds : 0.0;
  return report;
}

}  // namespace a3d

#endif  // A3D_PIPELINE_HPP
