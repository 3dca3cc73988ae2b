#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gazenet/core.hpp"
#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gazenet;

namespace {

template <typename F>
ErrorCategory category_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "expected gazenet::Error";
  return ErrorCategory::Config;
}

}  // namespace

TEST(Geometry, HundredPixelsRightOfCentre) {
  // Frozen from atan(100 * 52 / 1920 / 60) in degrees.
  EXPECT_NEAR(px_to_deg(1060.0, Axis::Horizontal, ScreenGeometry{}), 2.58451344596558, 1e-12);
}

TEST(Geometry, CentreIsZeroAndSignFollowsOffset) {
  const ScreenGeometry g;
  EXPECT_DOUBLE_EQ(px_to_deg(960.0, Axis::Horizontal, g), 0.0);
  EXPECT_DOUBLE_EQ(px_to_deg(540.0, Axis::Vertical, g), 0.0);
  EXPECT_LT(px_to_deg(100.0, Axis::Horizontal, g), 0.0);
  EXPECT_GT(px_to_deg(1000.0, Axis::Vertical, g), 0.0);
}

TEST(Geometry, MatchesTrigonometricOracle) {
  const ScreenGeometry g;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-500.0, 2500.0);
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng);
    EXPECT_NEAR(px_to_deg(x, Axis::Horizontal, g), oracle::visual_angle(x, 1920, 52, 60), 1e-12);
    EXPECT_NEAR(px_to_deg(x, Axis::Vertical, g), oracle::visual_angle(x, 1080, 29, 60), 1e-12);
  }
}

TEST(Geometry, DegreesRoundTrip) {
  const ScreenGeometry g;
  for (double px = -300; px < 2200; px += 37.5) {
    EXPECT_NEAR(deg_to_px(px_to_deg(px, Axis::Horizontal, g), Axis::Horizontal, g), px, 1e-9);
    EXPECT_NEAR(deg_to_px(px_to_deg(px, Axis::Vertical, g), Axis::Vertical, g), px, 1e-9);
  }
}

TEST(Geometry, PixelsPerDegreeAtCentre) {
  const ScreenGeometry g;
  const double ppd = px_per_deg_at_center(Axis::Horizontal, g);
  EXPECT_NEAR(px_to_deg(960.0 + ppd, Axis::Horizontal, g), 1.0, 1e-12);
}

TEST(Geometry, RejectsBadInput) {
  ScreenGeometry g;
  g.viewing_distance_cm = 0;
  EXPECT_EQ(category_of([&] { g.validate(); }), ErrorCategory::InvalidArgument);
  EXPECT_EQ(category_of([] { deg_to_px(90.0, Axis::Horizontal, ScreenGeometry{}); }), ErrorCategory::InvalidArgument);
  EXPECT_EQ(category_of([] { px_to_deg(NAN, Axis::Horizontal, ScreenGeometry{}); }), ErrorCategory::InvalidArgument);
}

TEST(FrameAlignment, CentreOfFixation) {
  VideoMeta v;
  v.frame_rate_hz = 30;
  v.frame_count = 1000;
  EXPECT_EQ(align_fixation_to_frame(1000.0, 200.0, v), 33);
}

TEST(FrameAlignment, ClampsToValidRange) {
  VideoMeta v;
  v.frame_rate_hz = 30;
  v.frame_count = 10;
  EXPECT_EQ(align_fixation_to_frame(-500.0, 100.0, v), 0);
  EXPECT_EQ(align_fixation_to_frame(60000.0, 100.0, v), 9);
}

TEST(Recording, RejectsIrregularTimestamps) {
  std::vector<GazeSample> s{{0, 1, 1, true}, {10, 1, 1, true}};
  EXPECT_EQ(category_of([&] { GazeRecording("a", "v", 60, s); }), ErrorCategory::Data);
  std::vector<GazeSample> back{{10, 1, 1, true}, {0, 1, 1, true}};
  EXPECT_EQ(category_of([&] { GazeRecording("a", "v", 100, back); }), ErrorCategory::Data);
  EXPECT_EQ(category_of([] { GazeRecording("a", "v", 0, {}); }), ErrorCategory::InvalidArgument);
}

TEST(Recording, InvalidFraction) {
  std::vector<GazeSample> s{{0, 1, 1, true}, {10, 0, 0, false}, {20, 1, 1, true}, {30, 0, 0, false}};
  GazeRecording r("a", "v", 100, s);
  EXPECT_DOUBLE_EQ(r.invalid_fraction(), 0.5);
}

TEST(Recording, CsvRoundTrip) {
  testing_support::TempDir dir("core");
  std::vector<GazeSample> s;
  for (int i = 0; i < 50; ++i) s.push_back({i * 1000.0 / 60.0, 100.0 + i * 0.125, 200.0 - i / 3.0, i % 7 != 3});
  GazeRecording r("s1", "v1", 60, s);
  write_gaze_csv(dir / "g.csv", r);
  const auto back = load_gaze_csv(dir / "g.csv", "s1", "v1", 60);
  ASSERT_EQ(back.samples().size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back.samples()[i].timestamp_ms, s[i].timestamp_ms);
    EXPECT_EQ(back.samples()[i].valid, s[i].valid);
    if (s[i].valid) {
      EXPECT_EQ(back.samples()[i].x_px, s[i].x_px);
    }
  }
}

TEST(Recording, MalformedCsvIsFormatError) {
  testing_support::TempDir dir("core");
  text_io::write_file(dir / "bad.csv", "t,x,y\n1,2,3\n");
  EXPECT_EQ(category_of([&] { load_gaze_csv(dir / "bad.csv", "a", "v", 60); }), ErrorCategory::Format);
}

TEST(Labels, RoundTripWithMissingFields) {
  testing_support::TempDir dir("core");
  std::vector<SubjectLabel> labels{{"a", "v", 1, std::nullopt}, {"b", "v", std::nullopt, 1.25}, {"c", "v", 0, -0.5}};
  write_labels_csv(dir / "l.csv", labels);
  const auto back = load_labels_csv(dir / "l.csv");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].adhd_label, 1);
  EXPECT_FALSE(back[0].swan_score.has_value());
  EXPECT_FALSE(back[1].adhd_label.has_value());
  EXPECT_EQ(back[1].swan_score, 1.25);
  EXPECT_EQ(back[2].swan_score, -0.5);
}

TEST(Labels, RejectsNonBinaryLabel) {
  testing_support::TempDir dir("core");
  text_io::write_file(dir / "l.csv", "subject_id,video_id,adhd_label,swan_score\na,v,2,\n");
  EXPECT_EQ(category_of([&] { load_labels_csv(dir / "l.csv"); }), ErrorCategory::Format);
}

TEST(TextIo, ShortestRoundTrip) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = g(rng);
    EXPECT_EQ(text_io::parse_double(text_io::format_double(v), "t"), v);
  }
  EXPECT_EQ(text_io::format_double(0.5), "0.5");
}

TEST(Errors, CategoryNames) {
  EXPECT_EQ(category_name(ErrorCategory::InvalidArgument), "invalid-argument");
  EXPECT_EQ(category_name(ErrorCategory::MissingStage), "missing-stage");
  EXPECT_EQ(category_name(ErrorCategory::Numeric), "numeric");
}
