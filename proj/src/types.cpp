#include "ihoi/types.hpp"

#include <stdexcept>

#include <fmt/core.h>

namespace ihoi {

bool is_human(const DetectedInstance& instance, int human_category) {
  Eigen::Index best = 0;
  instance.category_scores.maxCoeff(&best);  // first max wins ties
  return static_cast<int>(best) == human_category;
}

Scene filter_detections(const Scene& scene, Scalar human_thresh,
                        Scalar object_thresh, int human_category) {
  Scene out = scene;
  out.instances.clear();
  for (const auto& inst : scene.instances) {
    const Scalar thresh =
        is_human(inst, human_category) ? human_thresh : object_thresh;
    if (inst.detection_score >= thresh) out.instances.push_back(inst);
  }
  // prune gaze entries whose instance was dropped
  for (auto it = out.gaze_maps.begin(); it != out.gaze_maps.end();) {
    if (out.find(it->first) == nullptr)
      it = out.gaze_maps.erase(it);
    else
      ++it;
  }
  return out;
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

void validate_box(const BoundingBox& box, const std::string& where) {
  require(box.valid(), fmt::format("{}: invalid bounding box [{}, {}, {}, {}]",
                                   where, box.x1, box.y1, box.x2, box.y2));
}

}  // namespace

void validate_scene(const Scene& scene, int c_obj, int d_a) {
  const std::string sid = scene.scene_id.empty() ? "<unnamed>" : scene.scene_id;
  require(scene.image_width > 0 && scene.image_height > 0,
          fmt::format("scene {}: image_width/image_height must be positive", sid));

  std::set<int> ids;
  for (const auto& inst : scene.instances) {
    const std::string where = fmt::format("scene {} instance {}", sid, inst.id);
    require(ids.insert(inst.id).second, where + ": duplicate instance id");
    validate_box(inst.box, where + " box");
    require(inst.detection_score >= 0 && inst.detection_score <= 1,
            where + ": detection_score outside [0,1]");
    require(inst.category_scores.size() == c_obj,
            fmt::format("{}: category_scores has length {}, expected {}", where,
                        inst.category_scores.size(), c_obj));
    for (Eigen::Index i = 0; i < inst.category_scores.size(); ++i)
      require(inst.category_scores[i] >= 0 && inst.category_scores[i] <= 1,
              where + ": category_scores entry outside [0,1]");
    require(inst.appearance.size() == d_a,
            fmt::format("{}: appearance has length {}, expected {}", where,
                        inst.appearance.size(), d_a));
    require(inst.appearance.allFinite(), where + ": appearance not finite");
    if (inst.joints) {
      require(inst.joints->positions.allFinite(),
              where + ": joints positions not finite");
    }
  }

  for (const auto& [id, map] : scene.gaze_maps) {
    const std::string where = fmt::format("scene {} gaze_maps[{}]", sid, id);
    require(scene.find(id) != nullptr,
            where + ": references a nonexistent instance id");
    if (!map) continue;
    require(map->grid_height() >= 1 && map->grid_width() >= 1,
            where + ": grid must be at least 1x1");
    require(map->image_width > 0 && map->image_height > 0,
            where + ": image_width/image_height must be positive");
    require((map->values.array() >= 0).all(), where + ": values must be >= 0");
  }

  for (size_t g = 0; g < scene.ground_truth.size(); ++g) {
    const auto& gt = scene.ground_truth[g];
    const std::string where = fmt::format("scene {} ground_truth[{}]", sid, g);
    validate_box(gt.human_box, where + " human_box");
    if (gt.object_box) validate_box(*gt.object_box, where + " object_box");
    require(gt.action_role_id >= 0, where + ": action_role_id must be >= 0");
  }
}

void validate_vocabulary(const ActionVocabulary& vocab) {
  require(vocab.size() >= 1, "vocabulary: must define at least one slot");
  for (int i = 0; i < vocab.size(); ++i) {
    const auto& s = vocab.slot(i);
    if (s.requires_object)
      require(!s.relevant_categories.empty(),
              fmt::format("vocabulary slot {} ({}): relevant_categories empty "
                          "but requires_object is true", i, s.action));
    else
      require(s.relevant_categories.empty(),
              fmt::format("vocabulary slot {} ({}): relevant_categories must "
                          "be empty when requires_object is false", i, s.action));
  }
}

}  // namespace ihoi
