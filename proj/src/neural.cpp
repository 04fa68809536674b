#include "ihoi/neural.hpp"

#include <stdexcept>

#include <fmt/core.h>

namespace ihoi {

DenseNet make_dense(const std::vector<int>& dims, Scalar dropout_rate, Rng& rng) {
  if (dims.size() < 2) throw std::runtime_error("make_dense: need at least one layer");
  DenseNet net;
  net.dropout_rate = dropout_rate;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    const Scalar bound = std::sqrt(6.0 / static_cast<Scalar>(in + out));
    Matrix w(out, in);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(out));
  }
  return net;
}

Vector forward(const DenseNet& net, const Vector& input, Mode mode, Rng* rng,
               ForwardCache* cache) {
  if (input.size() != net.input_dim())
    throw std::runtime_error(fmt::format("forward: input has dim {}, net expects {}",
                                         input.size(), net.input_dim()));
  Vector x = input;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    if (cache) cache->inputs.push_back(x);
    Vector z = net.weights[l] * x + net.biases[l];
    const bool masked = mode == Mode::kTrain && net.dropout_rate > 0 &&
                        l + 1 < net.num_layers();
    if (masked) {
      if (rng == nullptr)
        throw std::runtime_error("forward: train mode with dropout needs an rng");
      const Scalar keep = 1.0 - net.dropout_rate;
      Vector mask(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i)
        mask[i] = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
      z = z.cwiseProduct(mask);
      if (cache) cache->masks.push_back(std::move(mask));
    } else if (cache) {
      cache->masks.emplace_back();
    }
    x = std::move(z);
  }
  return x;
}

NetGradients NetGradients::zeros_like(const DenseNet& net) {
  NetGradients g;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    g.weights.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.push_back(Vector::Zero(net.biases[l].size()));
  }
  return g;
}

void NetGradients::scale(Scalar s) {
  for (auto& w : weights) w *= s;
  for (auto& b : biases) b *= s;
}

Vector backward(const DenseNet& net, const ForwardCache& cache,
                const Vector& upstream, NetGradients& grads) {
  Vector d = upstream;
  for (size_t l = net.num_layers(); l-- > 0;) {
    if (cache.masks[l].size() != 0) d = d.cwiseProduct(cache.masks[l]);
    grads.weights[l].noalias() += d * cache.inputs[l].transpose();
    grads.biases[l] += d;
    d = net.weights[l].transpose() * d;
  }
  return d;
}

Scalar sigmoid(Scalar z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& z) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
  return out;
}

Scalar bce_loss(const Matrix& scores, const Matrix& labels) {
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols())
    throw std::runtime_error(
        fmt::format("bce_loss: scores are {}x{} but labels are {}x{}",
                    scores.rows(), scores.cols(), labels.rows(), labels.cols()));
  constexpr Scalar eps = 1e-7;
  Scalar total = 0;
  for (Eigen::Index j = 0; j < scores.rows(); ++j) {
    for (Eigen::Index i = 0; i < scores.cols(); ++i) {
      const Scalar s = std::clamp(scores(j, i), eps, 1.0 - eps);
      const Scalar y = labels(j, i);
      total += y * std::log(s) + (1.0 - y) * std::log(1.0 - s);
    }
  }
  return -total / static_cast<Scalar>(scores.rows());
}

OptimizerState make_optimizer(const DenseNet& net, const SgdHyperparams& hyper) {
  OptimizerState state;
  state.hyper = hyper;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    state.weight_velocity.push_back(
        Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
    state.bias_velocity.push_back(Vector::Zero(net.biases[l].size()));
  }
  return state;
}

void sgd_step(DenseNet& net, const NetGradients& grads, OptimizerState& state) {
  const auto& h = state.hyper;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    state.weight_velocity[l] = h.momentum * state.weight_velocity[l] +
                               grads.weights[l] + h.weight_decay * net.weights[l];
    net.weights[l] -= h.learning_rate * state.weight_velocity[l];
    state.bias_velocity[l] = h.momentum * state.bias_velocity[l] + grads.biases[l] +
                             h.weight_decay * net.biases[l];
    net.biases[l] -= h.learning_rate * state.bias_velocity[l];
  }
}

GradCheckReport grad_check(const DenseNet& net, const LossProbe& probe,
                           Scalar tolerance, Scalar step) {
  const NetGradients analytic = probe.gradients(net);
  DenseNet probe_net = net;
  GradCheckReport report;
  report.tolerance = tolerance;

  const auto check_entry = [&](Scalar& param, Scalar analytic_grad) {
    const Scalar saved = param;
    param = saved + step;
    const Scalar up = probe.value(probe_net);
    param = saved - step;
    const Scalar down = probe.value(probe_net);
    param = saved;
    const Scalar numeric = (up - down) / (2.0 * step);
    const Scalar denom =
        std::max({Scalar{1}, std::abs(analytic_grad), std::abs(numeric)});
    report.max_relative_error =
        std::max(report.max_relative_error, std::abs(analytic_grad - numeric) / denom);
    ++report.parameters_checked;
  };

  for (size_t l = 0; l < net.num_layers(); ++l) {
    for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
      for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c)
        check_entry(probe_net.weights[l](r, c), analytic.weights[l](r, c));
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
      check_entry(probe_net.biases[l][i], analytic.biases[l][i]);
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace ihoi
