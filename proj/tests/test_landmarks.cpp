#include <gtest/gtest.h>

#include <string>

#include "aurk/error.hpp"
#include "aurk/face_model.hpp"
#include "aurk/landmarks.hpp"

namespace {

std::string record_line(int pairs, double first_x = 10.0, double first_y = 20.0, int w = 512,
                        int h = 512) {
  std::string s = "S01/0001";
  for (int i = 0; i < pairs; ++i) {
    s += ',' + std::to_string(i == 0 ? first_x : 100.0 + i);
    s += ',' + std::to_string(i == 0 ? first_y : 200.0 + i);
  }
  s += ',' + std::to_string(w) + ',' + std::to_string(h);
  return s;
}

}  // namespace

TEST(Landmarks, ParsesSixtyEightPairs) {
  const auto rec = aurk::parse_landmark_record(record_line(68));
  EXPECT_EQ(rec.frame_id, "S01/0001");
  EXPECT_EQ(rec.landmarks.clamp_count, 0);
  EXPECT_EQ(rec.landmarks.image_width, 512);
  EXPECT_DOUBLE_EQ(rec.landmarks[0].x, 10.0);
  EXPECT_DOUBLE_EQ(rec.landmarks[67].y, 267.0);
}

TEST(Landmarks, RejectsWrongPointCount) {
  EXPECT_THROW(aurk::parse_landmark_record(record_line(67)), aurk::FormatError);
  EXPECT_THROW(aurk::parse_landmark_record(record_line(69)), aurk::FormatError);
}

TEST(Landmarks, ErrorNamesTheFrame) {
  try {
    aurk::parse_landmark_record(record_line(67));
    FAIL();
  } catch (const aurk::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("S01/0001"), std::string::npos);
  }
}

TEST(Landmarks, RejectsNonNumericField) {
  std::string line = record_line(68);
  line.replace(line.find(",10"), 3, ",ab");
  EXPECT_THROW(aurk::parse_landmark_record(line), aurk::FormatError);
}

TEST(Landmarks, ClampsOutOfBoundsPoints) {
  const auto rec = aurk::parse_landmark_record(record_line(68, 600.0, 300.0));
  EXPECT_EQ(rec.landmarks.clamp_count, 1);
  EXPECT_DOUBLE_EQ(rec.landmarks[0].x, 511.0);
  EXPECT_DOUBLE_EQ(rec.landmarks[0].y, 300.0);
}

TEST(Landmarks, FileRoundTrip) {
  std::mt19937_64 rng(3);
  std::vector<aurk::LandmarkRecord> recs;
  for (int i = 0; i < 5; ++i)
    recs.push_back({"S02/" + std::to_string(i), aurk::random_face(rng, 128, 128)});
  std::string text = "frame_id,x0,y0\n";
  for (const auto& r : recs) text += aurk::format_landmark_record(r) + "\n";
  const auto back = aurk::parse_landmark_file(text);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].frame_id, recs[i].frame_id);
    EXPECT_EQ(back[i].landmarks.points, recs[i].landmarks.points);
  }
}

TEST(FaceModel, RandomFacesStayInsideTheImage) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto lm = aurk::random_face(rng, 128, 128);
    EXPECT_EQ(lm.clamp_count, 0);
  }
}
