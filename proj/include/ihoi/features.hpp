#pragma once

#include <optional>
#include <string>

#include "ihoi/types.hpp"

namespace ihoi {

/// How the 16-entry pose segment is filled.
enum class PoseMode {
  kDistances,  // joint-to-instance-center distances, normalized by human width
  kLocations,  // joint coordinates normalized by image size
  kNone,       // all zeros
};

PoseMode pose_mode_from_string(const std::string& s);
std::string to_string(PoseMode mode);

struct FeatureConfig {
  int c_obj = 8;
  int d_a = 16;
  int human_category = 0;
  PoseMode pose_mode = PoseMode::kDistances;

  /// Total feature length: [categories | appearance | location(4) | pose(16)].
  int feature_dim() const { return c_obj + d_a + 4 + 2 * kNumJoints; }
};

/// Box location relative to a counterpart, Faster R-CNN parameterization:
/// ((cx-cx')/w', (cy-cy')/h', log(w/w'), log(h/h')).
Vector4 relative_location(const BoundingBox& box, const BoundingBox& counterpart);

/// Per-joint distances to the target box center, normalized by
/// normalizer_width. All zeros when joints are missing or any of the eight
/// is undetected.
Vector pose_distance_vector(const std::optional<PoseJoints>& joints,
                            const BoundingBox& target, Scalar normalizer_width);

/// Joint coordinates scaled by the image size; same zeroing rule.
Vector pose_location_vector(const std::optional<PoseJoints>& joints,
                            Scalar image_width, Scalar image_height);

/// Assembles [v_c | v_a | v_l | v_p] for one instance. counterpart_box feeds
/// the location segment; the pose segment uses human_joints against
/// distance_target (distances mode) or the image extent (locations mode).
Vector build_feature(const FeatureConfig& cfg, const DetectedInstance& instance,
                     const BoundingBox& counterpart_box,
                     const std::optional<PoseJoints>& human_joints,
                     Scalar human_width, const BoundingBox& distance_target,
                     Scalar image_width, Scalar image_height);

/// x_h for a human paired with object_box.
Vector human_feature(const FeatureConfig& cfg, const Scene& scene,
                     const DetectedInstance& human, const BoundingBox& object_box);

/// x_o for an object paired with a human.
Vector object_feature(const FeatureConfig& cfg, const Scene& scene,
                      const DetectedInstance& object, const DetectedInstance& human);

/// x_r for a context region of a given human.
Vector region_feature(const FeatureConfig& cfg, const Scene& scene,
                      const DetectedInstance& region, const DetectedInstance& human);

/// Element-wise difference x_h - x_o; throws on length mismatch.
Vector pairwise_embedding(const Vector& x_h, const Vector& x_o);

}  // namespace ihoi
