#pragma once

#include <cstdint>
#include <vector>

#include "ihoi/config.hpp"
#include "ihoi/types.hpp"

namespace ihoi {

/// Knobs of the synthetic benchmark. Signal strengths scale how strongly the
/// appearance, gaze, and pose/placement channels correlate with the planted
/// interactions; at zero the features are label-independent.
struct SynthConfig {
  std::uint64_t seed = 0;
  int train_scenes = 200;
  int test_scenes = 100;
  Scalar image_width = 640;
  Scalar image_height = 480;
  int gaze_grid_width = 40;
  int gaze_grid_height = 30;
  int c_obj = 8;
  int d_a = 16;
  int humans_min = 1;
  int humans_max = 2;
  int background_min = 4;
  int background_max = 6;
  Scalar distractor_rate = 0.5;
  Scalar gaze_dropout = 0.1;
  Scalar appearance_sep_human = 1.6;
  Scalar appearance_sep_object = 2.5;
  Scalar gaze_concentration = 0.9;
  Scalar pose_signal = 1.0;
  Scalar box_jitter = 0.0;
};

SynthConfig synth_config_from(const Config& config);

/// Six slots: lift/kick on category 1, drink/read on category 2, plus the
/// no-object run and smile. Categories 3..7 only appear as scene clutter.
ActionVocabulary default_vocabulary();

struct SynthDataset {
  std::vector<Scene> train;
  std::vector<Scene> test;
  ActionVocabulary vocab;
};

/// Deterministic for a fixed config. Every emitted scene is validated.
SynthDataset generate(const SynthConfig& cfg);

}  // namespace ihoi
