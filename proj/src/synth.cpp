#include "ihoi/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/core.h>

#include "ihoi/evaluation.hpp"
#include "ihoi/rng.hpp"

namespace ihoi {

SynthConfig synth_config_from(const Config& config) {
  SynthConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(config.get_int("seed"));
  cfg.train_scenes = config.get_int("synth.train_scenes");
  cfg.test_scenes = config.get_int("synth.test_scenes");
  cfg.image_width = config.get_double("synth.image_width");
  cfg.image_height = config.get_double("synth.image_height");
  cfg.gaze_grid_width = config.get_int("synth.gaze_grid_width");
  cfg.gaze_grid_height = config.get_int("synth.gaze_grid_height");
  cfg.c_obj = config.get_int("feature.c_obj");
  cfg.d_a = config.get_int("feature.d_a");
  cfg.humans_min = config.get_int("synth.humans_min");
  cfg.humans_max = config.get_int("synth.humans_max");
  cfg.background_min = config.get_int("synth.background_min");
  cfg.background_max = config.get_int("synth.background_max");
  cfg.distractor_rate = config.get_double("synth.distractor_rate");
  cfg.gaze_dropout = config.get_double("synth.gaze_dropout");
  cfg.appearance_sep_human = config.get_double("synth.appearance_sep_human");
  cfg.appearance_sep_object = config.get_double("synth.appearance_sep_object");
  cfg.gaze_concentration = config.get_double("synth.gaze_concentration");
  cfg.pose_signal = config.get_double("synth.pose_signal");
  cfg.box_jitter = config.get_double("synth.box_jitter");
  return cfg;
}

ActionVocabulary default_vocabulary() {
  ActionVocabulary vocab;
  vocab.slots = {
      {"lift", "obj", true, {1}},   {"kick", "obj", true, {1}},
      {"drink", "instr", true, {2}}, {"read", "obj", true, {2}},
      {"run", "agent", false, {}},  {"smile", "agent", false, {}},
  };
  return vocab;
}

namespace {

constexpr int kNumSlots = 6;
constexpr int kObjectSlots = 4;

// per object-requiring slot: category, characteristic joint, displacement
// fraction of that joint toward the object
constexpr int kSlotCategory[kObjectSlots] = {1, 1, 2, 2};
constexpr int kSlotJoint[kObjectSlots] = {5, 7, 0, 4};  // R elbow, R hip, nose, L elbow
constexpr Scalar kSlotJointPull[kObjectSlots] = {0.7, 0.6, 0.4, 0.5};

void check_config(const SynthConfig& cfg) {
  const auto fail = [](const std::string& what) {
    throw std::runtime_error("synth config: " + what);
  };
  if (cfg.train_scenes < 0 || cfg.test_scenes < 0) fail("scene counts must be >= 0");
  if (cfg.image_width <= 0 || cfg.image_height <= 0) fail("image size must be positive");
  if (cfg.gaze_grid_width < 1 || cfg.gaze_grid_height < 1) fail("gaze grid must be >= 1x1");
  if (cfg.c_obj < 8) fail("c_obj must be >= 8 (the vocabulary uses categories 0..7)");
  if (cfg.d_a < 1) fail("d_a must be >= 1");
  if (cfg.humans_min < 1 || cfg.humans_max < cfg.humans_min) fail("bad humans range");
  if (cfg.background_min < 0 || cfg.background_max < cfg.background_min)
    fail("bad background range");
  for (Scalar p : {cfg.distractor_rate, cfg.gaze_dropout, cfg.gaze_concentration})
    if (p < 0 || p > 1) fail("probabilities must lie in [0,1]");
  if (cfg.appearance_sep_human < 0 || cfg.appearance_sep_object < 0 ||
      cfg.pose_signal < 0 || cfg.box_jitter < 0)
    fail("signal strengths must be >= 0");
}

struct ClassMeans {
  std::vector<Vector> human;   // one mean per action slot
  std::vector<Vector> object;  // one mean per category
};

ClassMeans draw_means(const SynthConfig& cfg) {
  ClassMeans means;
  Rng rng(Rng::derive(cfg.seed, "class-means"));
  for (int a = 0; a < kNumSlots; ++a) {
    Vector u = rng.normal_vector(cfg.d_a);
    means.human.push_back(cfg.appearance_sep_human * u.normalized());
  }
  for (int c = 0; c < cfg.c_obj; ++c) {
    Vector u = rng.normal_vector(cfg.d_a);
    means.object.push_back(cfg.appearance_sep_object * u.normalized());
  }
  return means;
}

Vector category_scores(int category, int c_obj, Rng& rng) {
  const Scalar top = rng.uniform(0.75, 0.98);
  Vector scores(c_obj);
  Scalar rest = 0;
  for (Eigen::Index i = 0; i < c_obj; ++i) {
    scores[i] = rng.uniform();
    rest += scores[i];
  }
  scores *= (1.0 - top) / std::max(rest, Scalar{1e-9});
  scores[category] = top;
  return scores;
}

BoundingBox box_from_center(Scalar cx, Scalar cy, Scalar w, Scalar h,
                            const SynthConfig& cfg) {
  // keep the whole box inside the image
  cx = std::clamp(cx, w / 2 + 1, cfg.image_width - w / 2 - 1);
  cy = std::clamp(cy, h / 2 + 1, cfg.image_height - h / 2 - 1);
  return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

/// Placement of an object that has nothing to do with its human: uniform
/// direction at 1.0 .. 2.8 human-widths. Used for distractors always, and
/// for interacted objects when pose_signal interpolates toward zero.
void unrelated_offset(Rng& rng, Scalar human_width, Scalar& dx, Scalar& dy) {
  const Scalar distance = rng.uniform(1.0, 2.8) * human_width;
  const Scalar angle = rng.uniform(0.0, 2.0 * M_PI);
  dx = distance * std::cos(angle);
  dy = distance * std::sin(angle);
}

/// Action-typed placement: lift/kick objects sit in the lower half-plane
/// around the actor, drink/read in the upper; the pair members share the
/// distribution so only pose (and appearance) separates them.
void action_offset(int slot, Rng& rng, Scalar human_width, Scalar& dx, Scalar& dy) {
  const bool upper = slot >= 2;  // drink, read
  const Scalar distance = (upper ? rng.uniform(0.5, 1.0) : rng.uniform(0.7, 1.4)) *
                          human_width;
  const Scalar angle = upper ? rng.uniform(M_PI, 2.0 * M_PI)  // above the actor
                             : rng.uniform(0.0, M_PI);
  dx = distance * std::cos(angle);
  dy = distance * std::sin(angle);
}

void object_dims(int category, Rng& rng, Scalar& w, Scalar& h) {
  if (category == 1) {
    w = rng.uniform(22, 70);
    h = w * rng.uniform(0.8, 1.25);
  } else if (category == 2) {
    w = rng.uniform(20, 48);
    h = rng.uniform(26, 70);
  } else {
    w = rng.uniform(20, 120);
    h = rng.uniform(20, 120);
  }
}

PoseJoints make_joints(const BoundingBox& human, Rng& rng) {
  const Scalar cx = human.center_x();
  const Scalar w = human.width();
  const Scalar top = human.y1;
  const Scalar h = human.height();
  PoseJoints joints;
  const Scalar base[kNumJoints][2] = {
      {cx, top + 0.08 * h},             // nose
      {cx, top + 0.17 * h},             // neck
      {cx - 0.30 * w, top + 0.21 * h},  // L shoulder
      {cx + 0.30 * w, top + 0.21 * h},  // R shoulder
      {cx - 0.40 * w, top + 0.38 * h},  // L elbow
      {cx + 0.40 * w, top + 0.38 * h},  // R elbow
      {cx - 0.18 * w, top + 0.52 * h},  // L hip
      {cx + 0.18 * w, top + 0.52 * h},  // R hip
  };
  for (int j = 0; j < kNumJoints; ++j) {
    joints.positions(j, 0) = base[j][0] + 2.0 * rng.normal();
    joints.positions(j, 1) = base[j][1] + 2.0 * rng.normal();
    joints.present[static_cast<size_t>(j)] = true;
  }
  return joints;
}

GazeMap make_gaze_map(const SynthConfig& cfg, Scalar focus_x, Scalar focus_y) {
  GazeMap map;
  map.image_width = cfg.image_width;
  map.image_height = cfg.image_height;
  map.values.resize(cfg.gaze_grid_height, cfg.gaze_grid_width);
  const Scalar cell_w = cfg.image_width / cfg.gaze_grid_width;
  const Scalar cell_h = cfg.image_height / cfg.gaze_grid_height;
  const Scalar sigma = 45.0;
  Scalar total = 0;
  for (Eigen::Index r = 0; r < map.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.values.cols(); ++c) {
      const Scalar x = (static_cast<Scalar>(c) + 0.5) * cell_w;
      const Scalar y = (static_cast<Scalar>(r) + 0.5) * cell_h;
      const Scalar d2 = (x - focus_x) * (x - focus_x) + (y - focus_y) * (y - focus_y);
      const Scalar bump = std::exp(-d2 / (2.0 * sigma * sigma));
      map.values(r, c) = cfg.gaze_concentration * bump +
                         (1.0 - cfg.gaze_concentration) * 1e-3;
      total += map.values(r, c);
    }
  }
  if (total > 0) map.values /= total;
  return map;
}

BoundingBox jittered(const BoundingBox& box, Scalar jitter, Rng& rng) {
  if (jitter <= 0) return box;
  BoundingBox out{box.x1 + rng.uniform(-jitter, jitter),
                  box.y1 + rng.uniform(-jitter, jitter),
                  box.x2 + rng.uniform(-jitter, jitter),
                  box.y2 + rng.uniform(-jitter, jitter)};
  if (out.x2 - out.x1 < 2) out.x2 = out.x1 + 2;
  if (out.y2 - out.y1 < 2) out.y2 = out.y1 + 2;
  return out;
}

Scene make_scene(const SynthConfig& cfg, const ClassMeans& means,
                 const std::string& scene_id, std::uint64_t scene_seed) {
  Rng rng(scene_seed);
  Scene scene;
  scene.scene_id = scene_id;
  scene.image_width = cfg.image_width;
  scene.image_height = cfg.image_height;

  struct Actor {
    BoundingBox box;
    int slot;
    int human_id;
  };

  const int n_humans = cfg.humans_min + rng.index(cfg.humans_max - cfg.humans_min + 1);
  std::vector<Actor> actors;
  std::vector<BoundingBox> true_objects;
  int next_id = 0;

  for (int i = 0; i < n_humans; ++i) {
    const Scalar w = rng.uniform(50, 90);
    const Scalar h = rng.uniform(130, 190);
    BoundingBox box;
    for (int attempt = 0; attempt < 30; ++attempt) {
      box = box_from_center(rng.uniform(0.15, 0.85) * cfg.image_width,
                            rng.uniform(0.35, 0.70) * cfg.image_height, w, h, cfg);
      bool crowded = false;
      for (const auto& other : actors)
        if (iou(box, other.box) > 0.25) crowded = true;
      if (!crowded) break;
    }
    actors.push_back({box, rng.index(kNumSlots), next_id});

    DetectedInstance human;
    human.id = next_id++;
    human.box = jittered(box, cfg.box_jitter, rng);
    human.detection_score = rng.uniform(0.82, 0.99);
    human.category_scores = category_scores(0, cfg.c_obj, rng);
    human.appearance =
        means.human[static_cast<size_t>(actors.back().slot)] + rng.normal_vector(cfg.d_a);
    human.joints = make_joints(box, rng);
    scene.instances.push_back(std::move(human));
  }

  // interacted objects, ground truth, pose displacement, gaze focus
  std::vector<std::pair<int, Scalar>> gaze_focus_x;  // human id -> focus
  std::vector<Scalar> gaze_focus_y;
  for (auto& actor : actors) {
    Scalar focus_x = rng.uniform(0.1, 0.9) * cfg.image_width;
    Scalar focus_y = rng.uniform(0.1, 0.9) * cfg.image_height;
    if (actor.slot < kObjectSlots) {
      const int category = kSlotCategory[actor.slot];
      Scalar ow, oh;
      object_dims(category, rng, ow, oh);
      Scalar adx, ady, udx, udy;
      action_offset(actor.slot, rng, actor.box.width(), adx, ady);
      unrelated_offset(rng, actor.box.width(), udx, udy);
      const Scalar dx = cfg.pose_signal * adx + (1.0 - cfg.pose_signal) * udx;
      const Scalar dy = cfg.pose_signal * ady + (1.0 - cfg.pose_signal) * udy;
      const BoundingBox obox = box_from_center(actor.box.center_x() + dx,
                                               actor.box.center_y() + dy, ow, oh, cfg);
      true_objects.push_back(obox);
      scene.ground_truth.push_back({actor.box, obox, actor.slot});

      DetectedInstance object;
      object.id = next_id++;
      object.box = jittered(obox, cfg.box_jitter, rng);
      object.detection_score = rng.uniform(0.45, 0.99);
      object.category_scores = category_scores(category, cfg.c_obj, rng);
      object.appearance =
          means.object[static_cast<size_t>(category)] + rng.normal_vector(cfg.d_a);
      scene.instances.push_back(std::move(object));

      // the characteristic joint reaches toward the object
      auto& joints = *scene.instances[static_cast<size_t>(actor.human_id)].joints;
      const int j = kSlotJoint[actor.slot];
      const Scalar pull = cfg.pose_signal * kSlotJointPull[actor.slot];
      joints.positions(j, 0) += pull * (obox.center_x() - joints.positions(j, 0));
      joints.positions(j, 1) += pull * (obox.center_y() - joints.positions(j, 1));

      focus_x = obox.center_x() + 8.0 * rng.normal();
      focus_y = obox.center_y() + 8.0 * rng.normal();
    } else {
      scene.ground_truth.push_back({actor.box, std::nullopt, actor.slot});
    }
    gaze_focus_x.push_back({actor.human_id, focus_x});
    gaze_focus_y.push_back(focus_y);
  }

  // same-category distractors at unrelated positions
  for (const auto& actor : actors) {
    if (actor.slot >= kObjectSlots || !rng.bernoulli(cfg.distractor_rate)) continue;
    const int category = kSlotCategory[actor.slot];
    Scalar ow, oh;
    object_dims(category, rng, ow, oh);
    BoundingBox box;
    bool placed = false;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      Scalar dx, dy;
      unrelated_offset(rng, actor.box.width(), dx, dy);
      box = box_from_center(actor.box.center_x() + dx, actor.box.center_y() + dy,
                            ow, oh, cfg);
      placed = true;
      for (const auto& tob : true_objects)
        if (iou(box, tob) > 0.1) placed = false;
    }
    if (!placed) continue;

    DetectedInstance object;
    object.id = next_id++;
    object.box = jittered(box, cfg.box_jitter, rng);
    object.detection_score = rng.uniform(0.45, 0.99);
    object.category_scores = category_scores(category, cfg.c_obj, rng);
    object.appearance =
        means.object[static_cast<size_t>(category)] + rng.normal_vector(cfg.d_a);
    scene.instances.push_back(std::move(object));
  }

  // background clutter in the irrelevant categories
  const int n_background =
      cfg.background_min + rng.index(cfg.background_max - cfg.background_min + 1);
  for (int i = 0; i < n_background; ++i) {
    const int category = 3 + rng.index(cfg.c_obj - 3);
    Scalar ow, oh;
    object_dims(category, rng, ow, oh);
    BoundingBox box;
    bool placed = false;
    for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
      box = box_from_center(rng.uniform(0.05, 0.95) * cfg.image_width,
                            rng.uniform(0.05, 0.95) * cfg.image_height, ow, oh, cfg);
      placed = true;
      for (const auto& tob : true_objects)
        if (iou(box, tob) > 0.3) placed = false;
    }
    if (!placed) continue;

    DetectedInstance object;
    object.id = next_id++;
    object.box = jittered(box, cfg.box_jitter, rng);
    object.detection_score = rng.uniform(0.45, 0.99);
    object.category_scores = category_scores(category, cfg.c_obj, rng);
    object.appearance =
        means.object[static_cast<size_t>(category)] + rng.normal_vector(cfg.d_a);
    scene.instances.push_back(std::move(object));
  }

  for (size_t i = 0; i < gaze_focus_x.size(); ++i) {
    const int human_id = gaze_focus_x[i].first;
    if (rng.bernoulli(cfg.gaze_dropout))
      scene.gaze_maps[human_id] = std::nullopt;
    else
      scene.gaze_maps[human_id] =
          make_gaze_map(cfg, gaze_focus_x[i].second, gaze_focus_y[i]);
  }
  return scene;
}

}  // namespace

SynthDataset generate(const SynthConfig& cfg) {
  check_config(cfg);
  const ClassMeans means = draw_means(cfg);
  SynthDataset data;
  data.vocab = default_vocabulary();
  for (int i = 0; i < cfg.train_scenes; ++i) {
    const std::string id = fmt::format("train-{:05d}", i);
    data.train.push_back(make_scene(cfg, means, id, Rng::derive(cfg.seed, id)));
    validate_scene(data.train.back(), cfg.c_obj, cfg.d_a);
  }
  for (int i = 0; i < cfg.test_scenes; ++i) {
    const std::string id = fmt::format("test-{:05d}", i);
    data.test.push_back(make_scene(cfg, means, id, Rng::derive(cfg.seed, id)));
    validate_scene(data.test.back(), cfg.c_obj, cfg.d_a);
  }
  return data;
}

}  // namespace ihoi
