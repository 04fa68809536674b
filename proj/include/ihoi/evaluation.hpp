#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ihoi/inference.hpp"
#include "ihoi/types.hpp"

namespace ihoi {

/// Intersection over union of two boxes; 0 when disjoint.
Scalar iou(const BoundingBox& a, const BoundingBox& b);

enum class ApInterpolation { kEnvelope, kElevenPoint };

ApInterpolation ap_interpolation_from_string(const std::string& s);

/// One slot's prediction, reduced to what matching needs.
struct SlotPrediction {
  std::string scene_id;
  BoundingBox human_box;
  std::optional<BoundingBox> object_box;
  Scalar score = 0;
};

struct SlotGroundTruth {
  std::string scene_id;
  BoundingBox human_box;
  std::optional<BoundingBox> object_box;
};

/// Average precision for one slot. Predictions are ranked by descending
/// score; each greedily claims the unmatched same-scene ground truth with the
/// highest min(IoU_h, IoU_o), requiring both IoUs >= 0.5 (human IoU alone for
/// no-object slots). Returns 0 when there is no ground truth.
Scalar match_and_ap(std::vector<SlotPrediction> predictions,
                    const std::vector<SlotGroundTruth>& ground_truth,
                    bool requires_object,
                    ApInterpolation interp = ApInterpolation::kEnvelope);

struct SlotReport {
  int slot_id = 0;
  std::string action;
  std::string role;
  Scalar ap = 0;
  int gt_count = 0;
  int prediction_count = 0;
};

struct EvalReport {
  std::vector<SlotReport> slots;
  Scalar map_role = 0;     // mean AP over slots with at least one GT
  int slots_with_gt = 0;
  // HICO-style splits, present when training GT counts were supplied
  std::optional<Scalar> map_full;
  std::optional<Scalar> map_rare;
  std::optional<Scalar> map_non_rare;
};

struct EvalOptions {
  ApInterpolation interpolation = ApInterpolation::kEnvelope;
  // slot -> GT count in the training split; enables rare/non-rare splits
  // when set together with rare_threshold > 0
  std::map<int, int> train_gt_counts;
  int rare_threshold = 0;
};

/// Scores a prediction set against scene ground truth. Throws when a
/// prediction references an unknown scene or violates the slot's
/// object-presence contract.
EvalReport evaluate(const std::vector<TripletPrediction>& predictions,
                    const std::vector<Scene>& scenes, const ActionVocabulary& vocab,
                    const EvalOptions& options = {});

void print_report(std::ostream& out, const EvalReport& report);
void save_report(const std::string& path, const EvalReport& report);

}  // namespace ihoi
