#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

using a3d::Errc;

namespace {

constexpr const char* kPortrait = R"({
  "calib_version": 1,
  "pitch": 52.0, "slope": -7.2, "center": 0.15,
  "screenW": 1536, "screenH": 2048
})";

std::string missing_key(const a3d::Error& e) { return e.detail(); }

}  // namespace

TEST(Calibration, PortraitFieldsPassThrough) {
  const auto p = a3d::parse_calibration(kPortrait);
  EXPECT_EQ(p.pitch_px, 52.0);
  EXPECT_EQ(p.slope, -7.2);
  EXPECT_EQ(p.center_offset, 0.15);
  EXPECT_EQ(p.screen_width_px, 1536u);
  EXPECT_EQ(p.screen_height_px, 2048u);
  EXPECT_EQ(p.subpixels_per_pixel, 3u);
  EXPECT_FALSE(p.flip_x);
  EXPECT_FALSE(p.flip_y);
}

TEST(Calibration, MissingPitchNamesTheKey) {
  try {
    a3d::parse_calibration(R"({"slope": 0, "center": 0, "screenW": 4, "screenH": 4})");
    FAIL();
  } catch (const a3d::Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingKey);
    EXPECT_EQ(missing_key(e), "pitch");
  }
}

TEST(Calibration, RejectsBadDocuments) {
  EXPECT_EQ(code_of([] { a3d::parse_calibration("{not json"); }), Errc::MalformedDocument);
  EXPECT_EQ(code_of([] { a3d::parse_calibration("[1, 2]"); }), Errc::MalformedDocument);
  EXPECT_EQ(code_of([] {
              a3d::parse_calibration(R"({"pitch": 0, "slope": 0, "center": 0, "screenW": 4, "screenH": 4})");
            }),
            Errc::InvalidValue);
  EXPECT_EQ(code_of([] {
              a3d::parse_calibration(R"({"pitch": 3, "slope": 0, "center": 0, "screenW": -4, "screenH": 4})");
            }),
            Errc::InvalidValue);
  EXPECT_EQ(code_of([] {
              a3d::parse_calibration(R"({"pitch": 3, "slope": "x", "center": 0, "screenW": 4, "screenH": 4})");
            }),
            Errc::InvalidValue);
  EXPECT_EQ(code_of([] {
              a3d::parse_calibration(
                  R"({"calib_version": 2, "pitch": 3, "slope": 0, "center": 0, "screenW": 4, "screenH": 4})");
            }),
            Errc::InvalidValue);
  EXPECT_EQ(code_of([] {
              a3d::parse_calibration(
                  R"({"pitch": 3, "slope": 0, "center": 0, "screenW": 4, "screenH": 4, "subp": 0})");
            }),
            Errc::InvalidValue);
}

TEST(Calibration, OptionalAndUnknownKeys) {
  const auto p = a3d::parse_calibration(R"({
    "pitch": {"value": 49.8}, "slope": {"value": 5.1}, "center": {"value": -0.3},
    "screenW": 2560, "screenH": 1600, "subp": 1, "flipX": true, "flipY": 1,
    "lensesPerInch": 40.0, "serial": "LKG-123"
  })");
  EXPECT_EQ(p.pitch_px, 49.8);
  EXPECT_EQ(p.slope, 5.1);
  EXPECT_EQ(p.center_offset, -0.3);
  EXPECT_EQ(p.subpixels_per_pixel, 1u);
  EXPECT_TRUE(p.flip_x);
  EXPECT_TRUE(p.flip_y);
}

TEST(Calibration, RoundTripAndDeterminism) {
  std::mt19937 rng(17);
  for (int i = 0; i < 200; ++i) {
    const auto p = oracle::random_profile(rng, 1 + rng() % 5000, 1 + rng() % 5000);
    const std::string text = a3d::serialize_calibration(p);
    EXPECT_EQ(a3d::parse_calibration(text), p);
    EXPECT_EQ(a3d::parse_calibration(text), a3d::parse_calibration(text));
  }
}

// Random documents: whatever comes out must satisfy the invariants.
TEST(Calibration, FuzzedDocumentsNeverYieldInvalidProfiles) {
  std::mt19937 rng(23);
  const char* keys[] = {"pitch", "slope", "center", "screenW", "screenH", "subp", "flipX", "flipY"};
  const char* junk[] = {"0", "-1", "1.5", "1e308", "-7.2", "\"a\"", "null", "0.0",
                        "{\"value\": -4}", "[]", "true", "1e400"};
  const char* good[] = {"3", "52", "1536", "{\"value\": 4}"};
  int accepted = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string doc = "{";
    bool first = true;
    for (const char* key : keys) {
      if (rng() % 12 == 0) continue;
      if (!first) doc += ",";
      first = false;
      const char* value = rng() % 4 == 0 ? junk[rng() % std::size(junk)] : good[rng() % std::size(good)];
      doc += std::string("\"") + key + "\":" + value;
    }
    doc += "}";
    try {
      const auto p = a3d::parse_calibration(doc);
      ++accepted;
      EXPECT_GT(p.pitch_px, 0.0) << doc;
      EXPECT_TRUE(std::isfinite(p.pitch_px)) << doc;
      EXPECT_TRUE(std::isfinite(p.slope)) << doc;
      EXPECT_GT(p.screen_width_px, 0u) << doc;
      EXPECT_GT(p.screen_height_px, 0u) << doc;
      EXPECT_GE(p.subpixels_per_pixel, 1u) << doc;
    } catch (const a3d::Error& e) {
      EXPECT_TRUE(e.code() == Errc::MissingKey || e.code() == Errc::InvalidValue ||
                  e.code() == Errc::MalformedDocument)
          << doc;
    }
  }
  EXPECT_GT(accepted, 0);
}

TEST(Calibration, SlopeFromDegrees) {
  EXPECT_NEAR(a3d::slope_from_degrees(45.0), 1.0, 1e-12);
  EXPECT_NEAR(a3d::slope_from_degrees(-30.0), -std::sqrt(3.0) / 3.0, 1e-12);
  EXPECT_EQ(code_of([] { a3d::slope_from_degrees(90.0); }), Errc::InvalidValue);
}

TEST(Calibration, LoadFromFile) {
  const auto dir = oracle::temp_dir("calib");
  EXPECT_EQ(code_of([&] { a3d::load_calibration(dir / "nope.json"); }), Errc::UnreadableInput);
  {
    std::ofstream(dir / "visual.json") << kPortrait;
  }
  EXPECT_EQ(a3d::load_calibration(dir / "visual.json"), a3d::parse_calibration(kPortrait));
}
