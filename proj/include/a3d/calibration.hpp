#ifndef A3D_CALIBRATION_HPP
#define A3D_CALIBRATION_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "a3d/error.hpp"

namespace a3d {

//! Geometry of a slanted-lenticular panel. Horizontal quantities are in
//! subpixel columns.
struct CalibrationProfile {
  double pitch_px = 1.0;      // lens period along x
  double slope = 0.0;         // tan of the lens slant w.r.t. the panel vertical
  double center_offset = 0.0; // phase offset of view 0
  std::uint32_t screen_width_px = 1;
  std::uint32_t screen_height_px = 1;
  std::uint32_t subpixels_per_pixel = 3;
  bool flip_x = false;
  bool flip_y = false;

  bool operator==(const CalibrationProfile&) const = default;
};

inline constexpr int kCalibrationVersion = 1;

//! Throws InvalidValue if the profile breaks any geometric invariant.
inline void validate(const CalibrationProfile& p) {
  if (!std::isfinite(p.pitch_px) || !(p.pitch_px > 0.0)) {
    throw Error(Errc::InvalidValue, "pitch");
  }
  if (!std::isfinite(p.slope)) throw Error(Errc::InvalidValue, "slope");
  if (!std::isfinite(p.center_offset)) throw Error(Errc::InvalidValue, "center");
  if (p.screen_width_px == 0) throw Error(Errc::InvalidValue, "screenW");
  if (p.screen_height_px == 0) throw Error(Errc::InvalidValue, "screenH");
  if (p.subpixels_per_pixel == 0) throw Error(Errc::InvalidValue, "subp");
}

//! Converts a slant angle in degrees (from the panel vertical) to the stored
//! slope.
inline double slope_from_degrees(double degrees) {
  if (!std::isfinite(degrees) || std::abs(degrees) >= 90.0) {
    throw Error(Errc::InvalidValue, "slant angle must lie in (-90, 90) degrees");
  }
  return std::tan(degrees * std::numbers::pi / 180.0);
}

namespace detail {

// Vendor files wrap scalars as {"value": x}; accept both spellings.
inline const nlohmann::json& unwrap(const nlohmann::json& v) {
  if (v.is_object() && v.contains("value")) return v.at("value");
  return v;
}

inline const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw Error(Errc::MissingKey, key);
  return unwrap(*it);
}

inline double as_real(const nlohmann::json& v, const char* key) {
  if (!v.is_number()) throw Error(Errc::InvalidValue, key);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(Errc::InvalidValue, key);
  return d;
}

inline std::uint32_t as_positive_int(const nlohmann::json& v, const char* key) {
  const double d = as_real(v, key);
  if (d < 1.0 || d != std::floor(d) ||
      d > static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
    throw Error(Errc::InvalidValue, key);
  }
  return static_cast<std::uint32_t>(d);
}

inline bool as_flag(const nlohmann::json& v, const char* key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) {
    const double d = v.get<double>();
    if (d == 0.0) return false;
    if (d == 1.0) return true;
  }
  throw Error(Errc::InvalidValue, key);
}

}  // namespace detail

//! Parses a calibration document.
//!
//! Required keys: pitch, slope, center, screenW, screenH.
//! Optional keys: subp (default 3), flipX, flipY (default false),
//! calib_version (must be 1 when present). Anything else, including
//! lensesPerInch, is ignored.
inline CalibrationProfile parse_calibration(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedDocument, e.what());
  }
  if (!doc.is_object()) {
    throw Error(Errc::MalformedDocument, "calibration root must be an object");
  }
  if (auto it = doc.find("calib_version"); it != doc.end()) {
    const auto& v = detail::unwrap(*it);
    if (!v.is_number() || v.get<double>() != kCalibrationVersion) {
      throw Error(Errc::InvalidValue, "calib_version");
    }
  }

  CalibrationProfile p;
  p.pitch_px = detail::as_real(detail::require(doc, "pitch"), "pitch");
  p.slope = detail::as_real(detail::require(doc, "slope"), "slope");
  p.center_offset = detail::as_real(detail::require(doc, "center"), "center");
  p.screen_width_px = detail::as_positive_int(detail::require(doc, "screenW"), "screenW");
  p.screen_height_px = detail::as_positive_int(detail::require(doc, "screenH"), "screenH");
  if (auto it = doc.find("subp"); it != doc.end()) {
    p.subpixels_per_pixel = detail::as_positive_int(detail::unwrap(*it), "subp");
  }
  if (auto it = doc.find("flipX"); it != doc.end()) {
    p.flip_x = detail::as_flag(detail::unwrap(*it), "flipX");
  }
  if (auto it = doc.find("flipY"); it != doc.end()) {
    p.flip_y = detail::as_flag(detail::unwrap(*it), "flipY");
  }
  validate(p);
  return p;
}

inline std::string serialize_calibration(const CalibrationProfile& p) {
  nlohmann::ordered_json doc;
  doc["calib_version"] = kCalibrationVersion;
  doc["pitch"] = p.pitch_px;
  doc["slope"] = p.slope;
  doc["center"] = p.center_offset;
  doc["screenW"] = p.screen_width_px;
  doc["screenH"] = p.screen_height_px;
  doc["subp"] = p.subpixels_per_pixel;
  doc["flipX"] = p.flip_x;
  doc["flipY"] = p.flip_y;
  return doc.dump(2) + "\n";
}

inline CalibrationProfile load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableInput, "cannot open calibration '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_calibration(ss.str());
}

}  // namespace a3d

#endif  // A3D_CALIBRATION_HPP
