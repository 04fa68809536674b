#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ihoi/config.hpp"
#include "ihoi/features.hpp"
#include "ihoi/gaze.hpp"
#include "ihoi/neural.hpp"
#include "ihoi/types.hpp"

namespace ihoi {

enum class FusionMode { kSum, kMean };

FusionMode fusion_mode_from_string(const std::string& s);
std::string to_string(FusionMode mode);

struct ModelConfig {
  FeatureConfig features;
  int num_actions = 0;
  int hidden_dim = 64;
  Scalar dropout = 0.5;
  RegionMode region_mode = RegionMode::kGazed;
  FusionMode fusion = FusionMode::kSum;
};

/// The four branch networks. The pairwise and gaze heads are single linear
/// maps on full feature vectors; the human/object streams are two FC layers
/// with dropout on the visual appearance slice only.
struct ModelParams {
  FeatureConfig features;
  int num_actions = 0;
  RegionMode region_mode = RegionMode::kGazed;
  FusionMode fusion = FusionMode::kSum;
  DenseNet pairwise_head;   // feature_dim -> A
  DenseNet human_stream;    // d_a -> hidden -> A
  DenseNet object_stream;   // d_a -> hidden -> A
  DenseNet gaze_head;       // feature_dim -> A

  bool use_gaze_branch() const { return region_mode != RegionMode::kNone; }
};

ModelParams make_model(const ModelConfig& cfg, std::uint64_t seed);

/// Post-sigmoid per-branch action scores, each of length A and in (0,1).
/// When the gaze branch is disabled s_gaze is all ones (the multiplicative
/// identity under fusion).
struct BranchScores {
  Vector s_ho;
  Vector s_gaze;
  Vector s_h;
  Vector s_o;
};

/// Everything the model consumes for one human-object (or human-only) sample.
struct SampleFeatures {
  bool has_object = false;
  Vector x_h;                   // full human feature (paired); empty if no object
  Vector x_o;                   // full object feature; empty if no object
  Vector va_h;                  // appearance slice of the human
  Vector va_o;                  // appearance slice of the object; empty if none
  std::vector<Vector> regions;  // x_r of the selected context regions
};

struct BranchCaches {
  ForwardCache pairwise;
  ForwardCache human;
  ForwardCache object;
  std::vector<ForwardCache> gaze;  // one per region (or one for the zero input)
  std::vector<int> gaze_winner;    // per action, index of the max-scoring region
};

/// Scores a paired sample: s_ho from the pairwise embedding, s_h/s_o from the
/// appearance streams, s_gaze as the element-wise max over region scores
/// (a single zero feature stands in when no region is available).
BranchScores branch_forward(const ModelParams& params, const Vector& x_h,
                            const Vector& x_o, const std::vector<Vector>& regions,
                            Mode mode, Rng* rng, BranchCaches* caches = nullptr);

/// Same contract for an arbitrary sample; human-only samples get empty
/// s_ho/s_o.
BranchScores sample_forward(const ModelParams& params, const SampleFeatures& sample,
                            Mode mode, Rng* rng, BranchCaches* caches = nullptr);

/// Final action scores: s_ho * s_gaze * (s_h + s_o), element-wise; the last
/// factor averages instead of summing under FusionMode::kMean.
Vector fuse(const BranchScores& scores, FusionMode fusion = FusionMode::kSum);

struct TrainingSample {
  SampleFeatures features;
  Vector labels;  // length A, binary
};

struct ModelGradients {
  NetGradients pairwise;
  NetGradients human;
  NetGradients object;
  NetGradients gaze;

  static ModelGradients zeros_like(const ModelParams& params);
};

/// Per-branch binary cross entropies over a batch. Rows without an object
/// are excluded from the pairwise/object terms; each branch averages over
/// its own included rows.
struct BatchLosses {
  Scalar ho = 0;
  Scalar gaze = 0;
  Scalar h = 0;
  Scalar o = 0;
  int rows_with_object = 0;
  int rows = 0;

  Scalar total() const { return ho + gaze + h + o; }
};

/// Forward (and optionally backward) over one batch. The four branches share
/// no parameters, so the summed loss trains them independently. Gradients,
/// when requested, are accumulated into *grads.
BatchLosses total_loss(const ModelParams& params,
                       const std::vector<TrainingSample>& batch, Mode mode,
                       Rng* rng, ModelGradients* grads = nullptr);

struct ModelOptimizer {
  OptimizerState pairwise;
  OptimizerState human;
  OptimizerState object;
  OptimizerState gaze;
};

ModelOptimizer make_model_optimizer(const ModelParams& params,
                                    const SgdHyperparams& hyper);
void model_sgd_step(ModelParams& params, const ModelGradients& grads,
                    ModelOptimizer& optimizer);

/// Central finite differences over every parameter of the four nets against
/// the analytic gradients of total_loss on the given batch (dropout off).
GradCheckReport model_grad_check(const ModelParams& params,
                                 const std::vector<TrainingSample>& batch,
                                 Scalar tolerance, Scalar step = 1e-5);

/// The full gradient oracle: standalone stream/head checks plus whole-model
/// checks on randomized configurations, one per seed.
GradCheckReport run_gradient_suite(int num_seeds, std::uint64_t base_seed = 0,
                                   Scalar tolerance = 1e-4);

// -- checkpoint I/O ---------------------------------------------------------

struct Checkpoint {
  ModelParams params;
  std::optional<ModelOptimizer> optimizer;
  Config config;
  std::uint64_t vocab_hash = 0;
};

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ModelOptimizer* optimizer, const Config& config,
                     std::uint64_t vocab_hash);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ihoi
