#pragma once

#include <functional>
#include <vector>

#include "ihoi/rng.hpp"
#include "ihoi/types.hpp"

namespace ihoi {

enum class Mode { kTrain, kEval };

/// Affine chain with inverted dropout on every non-final layer output while
/// training. No built-in output activation; callers apply sigmoid.
struct DenseNet {
  std::vector<Matrix> weights;  // out x in per layer
  std::vector<Vector> biases;
  Scalar dropout_rate = 0.0;

  size_t num_layers() const { return weights.size(); }
  Eigen::Index input_dim() const { return weights.front().cols(); }
  Eigen::Index output_dim() const { return weights.back().rows(); }
};

/// Layers sized dims[0] -> dims[1] -> ... -> dims.back(), weights drawn
/// uniform in +-sqrt(6 / (in + out)), zero biases.
DenseNet make_dense(const std::vector<int>& dims, Scalar dropout_rate, Rng& rng);

struct ForwardCache {
  std::vector<Vector> inputs;  // input seen by each layer
  std::vector<Vector> masks;   // dropout mask per layer; empty when unmasked
};

/// In train mode each non-final layer output is scaled by a
/// Bernoulli(1 - dropout_rate) / (1 - dropout_rate) mask drawn from rng.
Vector forward(const DenseNet& net, const Vector& input, Mode mode, Rng* rng,
               ForwardCache* cache = nullptr);

struct NetGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static NetGradients zeros_like(const DenseNet& net);
  void scale(Scalar s);
};

/// Accumulates parameter gradients into grads and returns the gradient with
/// respect to the forward input. cache must come from the matching call.
Vector backward(const DenseNet& net, const ForwardCache& cache,
                const Vector& upstream, NetGradients& grads);

Scalar sigmoid(Scalar z);
Vector sigmoid(const Vector& z);

/// Eq-style multi-label binary cross entropy: mean over the M rows of the
/// summed per-action terms. Scores are clamped to [1e-7, 1 - 1e-7].
Scalar bce_loss(const Matrix& scores, const Matrix& labels);

struct SgdHyperparams {
  Scalar learning_rate = 0.001;
  Scalar momentum = 0.9;
  Scalar weight_decay = 0.0005;
};

struct OptimizerState {
  SgdHyperparams hyper;
  std::vector<Matrix> weight_velocity;
  std::vector<Vector> bias_velocity;
};

OptimizerState make_optimizer(const DenseNet& net, const SgdHyperparams& hyper);

/// v <- momentum * v + grad + weight_decay * param; param <- param - lr * v
void sgd_step(DenseNet& net, const NetGradients& grads, OptimizerState& state);

struct GradCheckReport {
  Scalar max_relative_error = 0;
  Scalar tolerance = 0;
  int parameters_checked = 0;
  bool passed = false;
};

/// A scalar loss over a net, with its analytic parameter gradients.
struct LossProbe {
  std::function<Scalar(const DenseNet&)> value;
  std::function<NetGradients(const DenseNet&)> gradients;
};

/// Central finite differences at the given step vs the analytic gradients.
/// Relative error uses max(1, |analytic|, |numeric|) as the denominator.
GradCheckReport grad_check(const DenseNet& net, const LossProbe& probe,
                           Scalar tolerance, Scalar step = 1e-5);

}  // namespace ihoi
