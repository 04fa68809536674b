#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ihoi {

using Scalar = double;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector4 = Eigen::Matrix<Scalar, 4, 1>;

/// Axis-aligned box in continuous image pixel coordinates, x1 < x2 and y1 < y2.
struct BoundingBox {
  Scalar x1{0}, y1{0}, x2{0}, y2{0};

  Scalar width() const { return x2 - x1; }
  Scalar height() const { return y2 - y1; }
  Scalar area() const { return width() * height(); }
  Scalar center_x() const { return 0.5 * (x1 + x2); }
  Scalar center_y() const { return 0.5 * (y1 + y2); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x1 < x2 && y1 < y2;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Fixed joint order: nose, neck, L/R shoulder, L/R elbow, L/R hip.
inline constexpr int kNumJoints = 8;

struct PoseJoints {
  Eigen::Matrix<Scalar, kNumJoints, 2> positions;  // (x, y) per joint
  std::array<bool, kNumJoints> present{};

  bool all_present() const {
    for (bool p : present)
      if (!p) return false;
    return true;
  }
};

/// Fixation probability density for one person, on a grid spanning
/// [0, image_width) x [0, image_height) pixels. values(i, j) is row i, col j.
struct GazeMap {
  Matrix values;
  Scalar image_width{0}, image_height{0};

  Eigen::Index grid_height() const { return values.rows(); }
  Eigen::Index grid_width() const { return values.cols(); }
};

struct DetectedInstance {
  int id{0};
  BoundingBox box;
  Scalar detection_score{0};
  Vector category_scores;
  Vector appearance;
  std::optional<PoseJoints> joints;
};

struct GroundTruthHOI {
  BoundingBox human_box;
  std::optional<BoundingBox> object_box;  // absent for no-object action roles
  int action_role_id{0};
};

struct Scene {
  std::string scene_id;
  Scalar image_width{0}, image_height{0};
  std::vector<DetectedInstance> instances;
  // human instance id -> density map; nullopt marks gaze unavailable for
  // that person (eyes invisible etc.), distinct from having no entry.
  std::map<int, std::optional<GazeMap>> gaze_maps;
  std::vector<GroundTruthHOI> ground_truth;  // may be empty at inference

  const DetectedInstance* find(int instance_id) const {
    for (const auto& inst : instances)
      if (inst.id == instance_id) return &inst;
    return nullptr;
  }
};

/// One evaluation slot: an (action, target role) pair.
struct ActionSlot {
  std::string action;
  std::string role;
  bool requires_object{false};
  std::set<int> relevant_categories;  // empty iff requires_object is false
};

struct ActionVocabulary {
  std::vector<ActionSlot> slots;

  int size() const { return static_cast<int>(slots.size()); }
  const ActionSlot& slot(int id) const { return slots.at(static_cast<size_t>(id)); }
};

/// True iff the argmax of category_scores is the human category
/// (first occurrence wins on ties).
bool is_human(const DetectedInstance& instance, int human_category);

/// Drops humans below human_thresh and non-humans below object_thresh.
/// Gaze map entries of dropped instances are removed; ground truth is kept.
Scene filter_detections(const Scene& scene, Scalar human_thresh,
                        Scalar object_thresh, int human_category);

/// Throws std::runtime_error naming the offending field if any invariant of
/// the scene or its members is violated. c_obj/d_a are the configured
/// category-score and appearance dimensions.
void validate_scene(const Scene& scene, int c_obj, int d_a);

void validate_vocabulary(const ActionVocabulary& vocab);

}  // namespace ihoi
