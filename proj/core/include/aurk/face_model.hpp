#pragma once

#include <random>

#include "aurk/landmarks.hpp"

namespace aurk {

/// Mean frontal face in the unit square (68 points, dlib numbering).
const std::array<Point, kLandmarkCount>& mean_face_template();

/// Template placed on a width x height image with a small margin.
Landmarks68 template_face(int width, int height);

/// Random variation of a frontal face.
struct FacePose {
  double scale = 1.0;      // relative face size
  double angle_deg = 0.0;  // in-plane rotation
  double shift_x = 0.0;    // fraction of image width
  double shift_y = 0.0;    // fraction of image height
};

struct FaceVariation {
  double min_scale = 0.85;
  double max_scale = 1.0;
  double max_angle_deg = 4.0;
  double max_shift_x = 0.04;
  double max_shift_y = 0.02;
  double jitter = 0.003;  // per-point Gaussian noise, fraction of image size
};

FacePose random_pose(std::mt19937_64& rng, const FaceVariation& v);

/// Places the template under `pose`, then adds per-point jitter.
Landmarks68 posed_face(const FacePose& pose, int width, int height, double jitter,
                       std::mt19937_64& rng);

Landmarks68 random_face(std::mt19937_64& rng, int width, int height,
                        const FaceVariation& v = FaceVariation{});

}  // namespace aurk
