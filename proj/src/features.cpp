#include "ihoi/features.hpp"

#include <stdexcept>

namespace ihoi {

PoseMode pose_mode_from_string(const std::string& s) {
  if (s == "distances") return PoseMode::kDistances;
  if (s == "locations") return PoseMode::kLocations;
  if (s == "none") return PoseMode::kNone;
  throw std::runtime_error("unknown pose mode: " + s);
}

std::string to_string(PoseMode mode) {
  switch (mode) {
    case PoseMode::kDistances: return "distances";
    case PoseMode::kLocations: return "locations";
    case PoseMode::kNone: return "none";
  }
  return "?";
}

Vector4 relative_location(const BoundingBox& box, const BoundingBox& counterpart) {
  Vector4 v;
  v[0] = (box.center_x() - counterpart.center_x()) / counterpart.width();
  v[1] = (box.center_y() - counterpart.center_y()) / counterpart.height();
  v[2] = std::log(box.width() / counterpart.width());
  v[3] = std::log(box.height() / counterpart.height());
  return v;
}

Vector pose_distance_vector(const std::optional<PoseJoints>& joints,
                            const BoundingBox& target, Scalar normalizer_width) {
  Vector v = Vector::Zero(2 * kNumJoints);
  if (!joints || !joints->all_present()) return v;
  const Scalar cx = target.center_x();
  const Scalar cy = target.center_y();
  for (int j = 0; j < kNumJoints; ++j) {
    v[2 * j] = (joints->positions(j, 0) - cx) / normalizer_width;
    v[2 * j + 1] = (joints->positions(j, 1) - cy) / normalizer_width;
  }
  return v;
}

Vector pose_location_vector(const std::optional<PoseJoints>& joints,
                            Scalar image_width, Scalar image_height) {
  Vector v = Vector::Zero(2 * kNumJoints);
  if (!joints || !joints->all_present()) return v;
  for (int j = 0; j < kNumJoints; ++j) {
    v[2 * j] = joints->positions(j, 0) / image_width;
    v[2 * j + 1] = joints->positions(j, 1) / image_height;
  }
  return v;
}

Vector build_feature(const FeatureConfig& cfg, const DetectedInstance& instance,
                     const BoundingBox& counterpart_box,
                     const std::optional<PoseJoints>& human_joints,
                     Scalar human_width, const BoundingBox& distance_target,
                     Scalar image_width, Scalar image_height) {
  Vector x(cfg.feature_dim());
  x.segment(0, cfg.c_obj) = instance.category_scores;
  x.segment(cfg.c_obj, cfg.d_a) = instance.appearance;
  x.segment(cfg.c_obj + cfg.d_a, 4) = relative_location(instance.box, counterpart_box);
  Vector pose;
  switch (cfg.pose_mode) {
    case PoseMode::kDistances:
      pose = pose_distance_vector(human_joints, distance_target, human_width);
      break;
    case PoseMode::kLocations:
      pose = pose_location_vector(human_joints, image_width, image_height);
      break;
    case PoseMode::kNone:
      pose = Vector::Zero(2 * kNumJoints);
      break;
  }
  x.segment(cfg.c_obj + cfg.d_a + 4, 2 * kNumJoints) = pose;
  return x;
}

Vector human_feature(const FeatureConfig& cfg, const Scene& scene,
                     const DetectedInstance& human, const BoundingBox& object_box) {
  return build_feature(cfg, human, object_box, human.joints, human.box.width(),
                       human.box, scene.image_width, scene.image_height);
}

Vector object_feature(const FeatureConfig& cfg, const Scene& scene,
                      const DetectedInstance& object, const DetectedInstance& human) {
  return build_feature(cfg, object, human.box, human.joints, human.box.width(),
                       object.box, scene.image_width, scene.image_height);
}

Vector region_feature(const FeatureConfig& cfg, const Scene& scene,
                      const DetectedInstance& region, const DetectedInstance& human) {
  return build_feature(cfg, region, human.box, human.joints, human.box.width(),
                       region.box, scene.image_width, scene.image_height);
}

Vector pairwise_embedding(const Vector& x_h, const Vector& x_o) {
  if (x_h.size() != x_o.size())
    throw std::runtime_error("pairwise_embedding: length mismatch");
  return x_h - x_o;
}

}  // namespace ihoi
