#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ihoi/model.hpp"
#include "ihoi/types.hpp"

namespace ihoi {

/// One scored <human, action-role, object> detection.
struct TripletPrediction {
  std::string scene_id;
  BoundingBox human_box;
  std::optional<BoundingBox> object_box;  // absent for no-object slots
  int action_role_id = 0;
  Scalar score = 0;
};

enum class InferenceMode { kVcoco, kHico };

InferenceMode inference_mode_from_string(const std::string& s);

/// Triplet scores for one human-object pair: per slot,
/// detection(h) * detection(o) * fused action score.
Vector score_pair(const ModelParams& params, const Scene& scene,
                  const DetectedInstance& human, const DetectedInstance& object,
                  int k);

/// Human-only triplet scores: detection(h) * s_gaze * s_h per no-object slot.
/// Entries of object-requiring slots are zero.
Vector score_human_only(const ModelParams& params, const Scene& scene,
                        const DetectedInstance& human,
                        const ActionVocabulary& vocab, int k);

/// Full per-scene inference. The scene must already be filtered. Candidate
/// objects per slot are the instances (other than the human) whose argmax
/// category is relevant to the slot. kVcoco keeps the best object within
/// each relevant category; kHico keeps up to max_per_pair objects overall.
std::vector<TripletPrediction> detect(const ModelParams& params, const Scene& scene,
                                      const ActionVocabulary& vocab,
                                      InferenceMode mode, int max_per_pair, int k);

void save_predictions(const std::string& path,
                      const std::vector<TripletPrediction>& predictions);
std::vector<TripletPrediction> load_predictions(const std::string& path);

}  // namespace ihoi
