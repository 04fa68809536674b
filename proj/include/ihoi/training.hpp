#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ihoi/model.hpp"
#include "ihoi/rng.hpp"
#include "ihoi/types.hpp"

namespace ihoi {

enum class MiningMode { kMisgroup, kAlternative, kNone };

MiningMode mining_mode_from_string(const std::string& s);
std::string to_string(MiningMode mode);

/// One training sample: a paired (or human-only) detection with its
/// multi-label action vector. Mined negatives carry all-zero labels.
struct TrainingTriplet {
  std::string scene_id;
  int human_id = 0;
  std::optional<int> object_id;
  std::vector<int> region_ids;
  Vector labels;
};

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  Scalar learning_rate = 0.001;
  Scalar momentum = 0.9;
  Scalar weight_decay = 0.0005;
  Scalar negative_ratio = 2.0;
  std::uint64_t seed = 0;
  int k_regions = 5;
  FeatureConfig features;                       // pose_mode is ablation (a)/(b)
  RegionMode region_mode = RegionMode::kGazed;  // ablation (c)/(d)
  MiningMode mining = MiningMode::kMisgroup;    // ablation (f) and iHOI
  int hidden_dim = 64;
  Scalar dropout = 0.5;
  FusionMode fusion = FusionMode::kSum;
  Scalar human_thresh = 0.8;
  Scalar object_thresh = 0.4;
};

/// Reads every train-relevant key out of the flat engine config.
TrainConfig train_config_from(const Config& config);

struct PositiveStats {
  int triplets = 0;
  int skipped_gt = 0;  // GT entries with no detection at IoU >= 0.5
};

/// One triplet per ground-truth pair, matched to detections by highest IoU
/// (>= 0.5 on both boxes). Actions sharing a pair merge into one label
/// vector. Region ids follow the configured region mode.
std::vector<TrainingTriplet> positive_triplets(const Scene& scene,
                                               const ActionVocabulary& vocab,
                                               const TrainConfig& cfg,
                                               PositiveStats* stats = nullptr);

/// Deliberately mis-grouped pairs with all-zero labels. The pool depends on
/// the mining mode: kMisgroup takes every detected human-object pair that
/// matches no ground-truth pair; kAlternative keeps only pairs where at
/// least one box fails to match any ground-truth instance (localization /
/// classification failures). A seeded sample of ceil(ratio * |positives|)
/// is drawn without replacement.
std::vector<TrainingTriplet> mine_hard_negatives(
    const Scene& scene, const std::vector<TrainingTriplet>& positives,
    Scalar ratio, Rng& rng, const TrainConfig& cfg);

/// Half-open chunk of one scene's triplet list.
struct BatchRef {
  int scene = 0;
  int begin = 0;
  int end = 0;
};

/// Image-centric batching: every batch holds triplets of exactly one scene;
/// longer scenes split into batch_size chunks; scene order is shuffled.
std::vector<BatchRef> make_batches(const std::vector<int>& triplets_per_scene,
                                   int batch_size, Rng& rng);

struct EpochLosses {
  Scalar ho = 0;
  Scalar gaze = 0;
  Scalar h = 0;
  Scalar o = 0;

  Scalar total() const { return ho + gaze + h + o; }
};

struct TrainResult {
  ModelParams params;
  ModelOptimizer optimizer;
  std::vector<EpochLosses> history;  // one entry per epoch
  int positives = 0;
  int negatives = 0;
  int skipped_gt = 0;
};

/// Full SGD loop: filters detections, builds positives and mined negatives,
/// precomputes features, then runs epochs of image-centric batches. Throws
/// if the dataset yields no positive triplets.
TrainResult train(const std::vector<Scene>& scenes, const ActionVocabulary& vocab,
                  const TrainConfig& cfg);

void save_metrics_csv(const std::string& path, const std::vector<EpochLosses>& history);

}  // namespace ihoi
