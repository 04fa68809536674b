#include "ihoi/gaze.hpp"

#include <algorithm>
#include <stdexcept>

namespace ihoi {

RegionMode region_mode_from_string(const std::string& s) {
  if (s == "gazed") return RegionMode::kGazed;
  if (s == "sorted") return RegionMode::kSorted;
  if (s == "none") return RegionMode::kNone;
  throw std::runtime_error("unknown region mode: " + s);
}

std::string to_string(RegionMode mode) {
  switch (mode) {
    case RegionMode::kGazed: return "gazed";
    case RegionMode::kSorted: return "sorted";
    case RegionMode::kNone: return "none";
  }
  return "?";
}

Scalar gaze_weight(const GazeMap& map, const BoundingBox& box) {
  const Scalar cell_w = map.image_width / static_cast<Scalar>(map.grid_width());
  const Scalar cell_h = map.image_height / static_cast<Scalar>(map.grid_height());
  // Only the cell-center rows/cols that can land inside the box need a scan.
  const auto first_idx = [](Scalar lo, Scalar cell) {
    return std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::ceil(lo / cell - 0.5)));
  };
  const Eigen::Index c0 = first_idx(box.x1, cell_w);
  const Eigen::Index r0 = first_idx(box.y1, cell_h);
  Scalar sum = 0;
  for (Eigen::Index r = r0; r < map.grid_height(); ++r) {
    const Scalar cy = (static_cast<Scalar>(r) + 0.5) * cell_h;
    if (cy >= box.y2) break;
    for (Eigen::Index c = c0; c < map.grid_width(); ++c) {
      const Scalar cx = (static_cast<Scalar>(c) + 0.5) * cell_w;
      if (cx >= box.x2) break;
      if (cx >= box.x1 && cy >= box.y1) sum += map.values(r, c);
    }
  }
  return sum / box.area();
}

namespace {

struct Ranked {
  int id;
  Scalar primary;    // gaze weight or detection score
  Scalar secondary;  // detection score (gaze ranking only)
};

std::vector<int> take_top(std::vector<Ranked> candidates, int k, bool use_secondary) {
  std::sort(candidates.begin(), candidates.end(),
            [use_secondary](const Ranked& a, const Ranked& b) {
              if (a.primary != b.primary) return a.primary > b.primary;
              if (use_secondary && a.secondary != b.secondary)
                return a.secondary > b.secondary;
              return a.id < b.id;
            });
  if (static_cast<int>(candidates.size()) > k) candidates.resize(static_cast<size_t>(k));
  std::vector<int> ids;
  ids.reserve(candidates.size());
  for (const auto& c : candidates) ids.push_back(c.id);
  return ids;
}

}  // namespace

std::vector<int> select_regions(const Scene& scene, const DetectedInstance& human,
                                int k) {
  const auto it = scene.gaze_maps.find(human.id);
  if (it == scene.gaze_maps.end() || !it->second) return {};
  const GazeMap& map = *it->second;
  std::vector<Ranked> candidates;
  for (const auto& inst : scene.instances) {
    if (inst.id == human.id) continue;
    candidates.push_back({inst.id, gaze_weight(map, inst.box), inst.detection_score});
  }
  return take_top(std::move(candidates), k, /*use_secondary=*/true);
}

std::vector<int> select_regions_by_score(const Scene& scene,
                                         const DetectedInstance& human, int k) {
  std::vector<Ranked> candidates;
  for (const auto& inst : scene.instances) {
    if (inst.id == human.id) continue;
    candidates.push_back({inst.id, inst.detection_score, 0});
  }
  return take_top(std::move(candidates), k, /*use_secondary=*/false);
}

std::vector<int> regions_for(const Scene& scene, const DetectedInstance& human,
                             int k, RegionMode mode) {
  switch (mode) {
    case RegionMode::kGazed: return select_regions(scene, human, k);
    case RegionMode::kSorted: return select_regions_by_score(scene, human, k);
    case RegionMode::kNone: return {};
  }
  return {};
}

}  // namespace ihoi
