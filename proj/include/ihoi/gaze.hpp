#pragma once

#include <string>
#include <vector>

#include "ihoi/types.hpp"

namespace ihoi {

enum class RegionMode {
  kGazed,   // rank candidates by gaze weight
  kSorted,  // rank candidates by detection score
  kNone,    // context branch disabled
};

RegionMode region_mode_from_string(const std::string& s);
std::string to_string(RegionMode mode);

/// Gaze weight of a box: density summed over grid cells whose centers fall
/// inside the box, divided by the box pixel area.
Scalar gaze_weight(const GazeMap& map, const BoundingBox& box);

/// Up to k candidate regions for a human, largest gaze weight first. Ties go
/// to the higher detection score, then the lower id. Candidates are every
/// other instance of the scene. Empty when the human has no gaze map.
std::vector<int> select_regions(const Scene& scene, const DetectedInstance& human,
                                int k);

/// Ablation baseline: same candidates ranked by detection score, ties by
/// lower id. Does not consult gaze maps.
std::vector<int> select_regions_by_score(const Scene& scene,
                                         const DetectedInstance& human, int k);

/// Dispatch on the configured mode; kNone always yields no regions.
std::vector<int> regions_for(const Scene& scene, const DetectedInstance& human,
                             int k, RegionMode mode);

}  // namespace ihoi
