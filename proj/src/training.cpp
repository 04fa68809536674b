#include "ihoi/training.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include <fmt/core.h>

#include "ihoi/evaluation.hpp"
#include "ihoi/gaze.hpp"

namespace ihoi {

MiningMode mining_mode_from_string(const std::string& s) {
  if (s == "misgroup") return MiningMode::kMisgroup;
  if (s == "alternative") return MiningMode::kAlternative;
  if (s == "none") return MiningMode::kNone;
  throw std::runtime_error("unknown mining mode: " + s);
}

std::string to_string(MiningMode mode) {
  switch (mode) {
    case MiningMode::kMisgroup: return "misgroup";
    case MiningMode::kAlternative: return "alternative";
    case MiningMode::kNone: return "none";
  }
  return "?";
}

TrainConfig train_config_from(const Config& config) {
  TrainConfig cfg;
  cfg.epochs = config.get_int("train.epochs");
  cfg.batch_size = config.get_int("train.batch_size");
  cfg.learning_rate = config.get_double("train.learning_rate");
  cfg.momentum = config.get_double("train.momentum");
  cfg.weight_decay = config.get_double("train.weight_decay");
  cfg.negative_ratio = config.get_double("train.negative_ratio");
  cfg.seed = static_cast<std::uint64_t>(config.get_int("seed"));
  cfg.k_regions = config.get_int("regions.k");
  cfg.features.c_obj = config.get_int("feature.c_obj");
  cfg.features.d_a = config.get_int("feature.d_a");
  cfg.features.human_category = config.get_int("feature.human_category");
  cfg.features.pose_mode = pose_mode_from_string(config.get("feature.pose_mode"));
  cfg.region_mode = region_mode_from_string(config.get("regions.mode"));
  cfg.mining = mining_mode_from_string(config.get("train.mining"));
  cfg.hidden_dim = config.get_int("model.hidden_dim");
  cfg.dropout = config.get_double("model.dropout");
  cfg.fusion = fusion_mode_from_string(config.get("model.fusion_ho"));
  cfg.human_thresh = config.get_double("filter.human_thresh");
  cfg.object_thresh = config.get_double("filter.object_thresh");
  return cfg;
}

namespace {

/// Best-IoU match of one box against a set of instances; -1 below 0.5.
int match_instance(const BoundingBox& box,
                   const std::vector<const DetectedInstance*>& candidates) {
  Scalar best_iou = -1;
  int best = -1;
  for (const auto* inst : candidates) {
    const Scalar v = iou(box, inst->box);
    if (v >= 0.5 && v > best_iou) {
      best_iou = v;
      best = inst->id;
    }
  }
  return best;
}

struct SceneIndex {
  std::vector<const DetectedInstance*> humans;
  std::vector<const DetectedInstance*> objects;  // non-human detections
  std::vector<const DetectedInstance*> all;
};

SceneIndex index_scene(const Scene& scene, int human_category) {
  SceneIndex index;
  for (const auto& inst : scene.instances) {
    index.all.push_back(&inst);
    if (is_human(inst, human_category))
      index.humans.push_back(&inst);
    else
      index.objects.push_back(&inst);
  }
  return index;
}

}  // namespace

std::vector<TrainingTriplet> positive_triplets(const Scene& scene,
                                               const ActionVocabulary& vocab,
                                               const TrainConfig& cfg,
                                               PositiveStats* stats) {
  const SceneIndex index = index_scene(scene, cfg.features.human_category);

  // (human id, object id or -1) -> merged label vector
  std::map<std::pair<int, int>, Vector> merged;
  for (const auto& gt : scene.ground_truth) {
    if (gt.action_role_id < 0 || gt.action_role_id >= vocab.size())
      throw std::runtime_error(
          fmt::format("scene {}: ground truth action_role_id {} outside vocabulary",
                      scene.scene_id, gt.action_role_id));
    const int human_id = match_instance(gt.human_box, index.humans);
    if (human_id < 0) {
      if (stats) ++stats->skipped_gt;
      continue;
    }
    int object_id = -1;
    if (gt.object_box) {
      // the object may be any other instance, humans included
      std::vector<const DetectedInstance*> candidates;
      for (const auto* inst : index.all)
        if (inst->id != human_id) candidates.push_back(inst);
      object_id = match_instance(*gt.object_box, candidates);
      if (object_id < 0) {
        if (stats) ++stats->skipped_gt;
        continue;
      }
    }
    auto [it, inserted] =
        merged.try_emplace({human_id, object_id}, Vector::Zero(vocab.size()));
    it->second[gt.action_role_id] = 1.0;
  }

  std::vector<TrainingTriplet> triplets;
  for (const auto& [pair, labels] : merged) {
    TrainingTriplet t;
    t.scene_id = scene.scene_id;
    t.human_id = pair.first;
    if (pair.second >= 0) t.object_id = pair.second;
    const DetectedInstance* human = scene.find(t.human_id);
    t.region_ids = regions_for(scene, *human, cfg.k_regions, cfg.region_mode);
    t.labels = labels;
    triplets.push_back(std::move(t));
  }
  if (stats) stats->triplets += static_cast<int>(triplets.size());
  return triplets;
}

std::vector<TrainingTriplet> mine_hard_negatives(
    const Scene& scene, const std::vector<TrainingTriplet>& positives,
    Scalar ratio, Rng& rng, const TrainConfig& cfg) {
  if (ratio <= 0 || positives.empty() || cfg.mining == MiningMode::kNone) return {};
  const SceneIndex index = index_scene(scene, cfg.features.human_category);

  const auto matches_gt_pair = [&](const DetectedInstance& h,
                                   const DetectedInstance& o) {
    for (const auto& gt : scene.ground_truth) {
      if (!gt.object_box) continue;
      if (iou(h.box, gt.human_box) >= 0.5 && iou(o.box, *gt.object_box) >= 0.5)
        return true;
    }
    return false;
  };
  const auto matches_any_gt_human = [&](const DetectedInstance& h) {
    for (const auto& gt : scene.ground_truth)
      if (iou(h.box, gt.human_box) >= 0.5) return true;
    return false;
  };
  const auto matches_any_gt_object = [&](const DetectedInstance& o) {
    for (const auto& gt : scene.ground_truth)
      if (gt.object_box && iou(o.box, *gt.object_box) >= 0.5) return true;
    return false;
  };

  std::vector<std::pair<const DetectedInstance*, const DetectedInstance*>> pool;
  for (const auto* h : index.humans) {
    for (const auto* o : index.objects) {
      if (matches_gt_pair(*h, *o)) continue;
      if (cfg.mining == MiningMode::kAlternative &&
          matches_any_gt_human(*h) && matches_any_gt_object(*o))
        continue;  // well-detected mis-grouped pairs are out of this pool
      pool.emplace_back(h, o);
    }
  }

  const auto want = static_cast<size_t>(
      std::ceil(ratio * static_cast<Scalar>(positives.size())));
  const size_t n = std::min(pool.size(), want);
  // partial Fisher-Yates over the canonical (human id, object id) order
  for (size_t i = 0; i < n; ++i) {
    const size_t j = i + static_cast<size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }

  std::vector<TrainingTriplet> negatives;
  for (size_t i = 0; i < n; ++i) {
    TrainingTriplet t;
    t.scene_id = scene.scene_id;
    t.human_id = pool[i].first->id;
    t.object_id = pool[i].second->id;
    t.region_ids = regions_for(scene, *pool[i].first, cfg.k_regions, cfg.region_mode);
    t.labels = Vector::Zero(positives.front().labels.size());
    negatives.push_back(std::move(t));
  }
  return negatives;
}

std::vector<BatchRef> make_batches(const std::vector<int>& triplets_per_scene,
                                   int batch_size, Rng& rng) {
  if (batch_size < 1) throw std::runtime_error("make_batches: batch_size must be >= 1");
  std::vector<int> order;
  for (size_t s = 0; s < triplets_per_scene.size(); ++s)
    if (triplets_per_scene[s] > 0) order.push_back(static_cast<int>(s));
  rng.shuffle(order);

  std::vector<BatchRef> batches;
  for (int s : order) {
    const int count = triplets_per_scene[static_cast<size_t>(s)];
    for (int begin = 0; begin < count; begin += batch_size)
      batches.push_back({s, begin, std::min(begin + batch_size, count)});
  }
  return batches;
}

namespace {

SampleFeatures build_sample(const Scene& scene, const TrainingTriplet& triplet,
                            const FeatureConfig& features) {
  const DetectedInstance* human = scene.find(triplet.human_id);
  if (!human)
    throw std::runtime_error(fmt::format("scene {}: triplet references missing human {}",
                                         scene.scene_id, triplet.human_id));
  SampleFeatures sample;
  sample.va_h = human->appearance;
  if (triplet.object_id) {
    const DetectedInstance* object = scene.find(*triplet.object_id);
    if (!object)
      throw std::runtime_error(fmt::format("scene {}: triplet references missing object {}",
                                           scene.scene_id, *triplet.object_id));
    sample.has_object = true;
    sample.x_h = human_feature(features, scene, *human, object->box);
    sample.x_o = object_feature(features, scene, *object, *human);
    sample.va_o = object->appearance;
  }
  for (int rid : triplet.region_ids) {
    const DetectedInstance* region = scene.find(rid);
    if (region) sample.regions.push_back(region_feature(features, scene, *region, *human));
  }
  return sample;
}

}  // namespace

TrainResult train(const std::vector<Scene>& scenes, const ActionVocabulary& vocab,
                  const TrainConfig& cfg) {
  std::vector<Scene> filtered;
  filtered.reserve(scenes.size());
  for (const auto& s : scenes)
    filtered.push_back(filter_detections(s, cfg.human_thresh, cfg.object_thresh,
                                         cfg.features.human_category));

  TrainResult result;
  PositiveStats stats;
  std::vector<std::vector<TrainingSample>> per_scene(filtered.size());
  for (size_t s = 0; s < filtered.size(); ++s) {
    const auto positives = positive_triplets(filtered[s], vocab, cfg, &stats);
    Rng mine_rng(Rng::derive(cfg.seed, "mine:" + filtered[s].scene_id));
    const auto negatives = mine_hard_negatives(filtered[s], positives,
                                               cfg.negative_ratio, mine_rng, cfg);
    result.positives += static_cast<int>(positives.size());
    result.negatives += static_cast<int>(negatives.size());
    for (const auto& t : positives)
      per_scene[s].push_back({build_sample(filtered[s], t, cfg.features), t.labels});
    for (const auto& t : negatives)
      per_scene[s].push_back({build_sample(filtered[s], t, cfg.features), t.labels});
  }
  result.skipped_gt = stats.skipped_gt;
  if (result.positives == 0)
    throw std::runtime_error("train: dataset yields no positive triplets");

  ModelConfig model_cfg;
  model_cfg.features = cfg.features;
  model_cfg.num_actions = vocab.size();
  model_cfg.hidden_dim = cfg.hidden_dim;
  model_cfg.dropout = cfg.dropout;
  model_cfg.region_mode = cfg.region_mode;
  model_cfg.fusion = cfg.fusion;
  result.params = make_model(model_cfg, Rng::derive(cfg.seed, "init"));
  result.optimizer = make_model_optimizer(
      result.params, {cfg.learning_rate, cfg.momentum, cfg.weight_decay});

  std::vector<int> counts(per_scene.size());
  for (size_t s = 0; s < per_scene.size(); ++s)
    counts[s] = static_cast<int>(per_scene[s].size());

  Rng dropout_rng(Rng::derive(cfg.seed, "dropout"));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng batch_rng(Rng::derive(cfg.seed, fmt::format("batches:{}", epoch)));
    const auto batches = make_batches(counts, cfg.batch_size, batch_rng);

    EpochLosses epoch_losses;
    Scalar rows_all = 0, rows_obj = 0;
    for (const auto& ref : batches) {
      const auto& samples = per_scene[static_cast<size_t>(ref.scene)];
      std::vector<TrainingSample> batch(samples.begin() + ref.begin,
                                        samples.begin() + ref.end);
      ModelGradients grads = ModelGradients::zeros_like(result.params);
      const BatchLosses losses =
          total_loss(result.params, batch, Mode::kTrain, &dropout_rng, &grads);
      model_sgd_step(result.params, grads, result.optimizer);

      epoch_losses.h += losses.h * losses.rows;
      epoch_losses.gaze += losses.gaze * losses.rows;
      epoch_losses.ho += losses.ho * losses.rows_with_object;
      epoch_losses.o += losses.o * losses.rows_with_object;
      rows_all += losses.rows;
      rows_obj += losses.rows_with_object;
    }
    if (rows_all > 0) {
      epoch_losses.h /= rows_all;
      epoch_losses.gaze /= rows_all;
    }
    if (rows_obj > 0) {
      epoch_losses.ho /= rows_obj;
      epoch_losses.o /= rows_obj;
    }
    result.history.push_back(epoch_losses);
  }
  return result;
}

void save_metrics_csv(const std::string& path, const std::vector<EpochLosses>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics: " + path);
  out << "epoch,loss_ho,loss_gaze,loss_h,loss_o,total\n";
  for (size_t e = 0; e < history.size(); ++e) {
    const auto& l = history[e];
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", e + 1, l.ho,
                       l.gaze, l.h, l.o, l.total());
  }
}

}  // namespace ihoi
