#include "ihoi/model.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/core.h>
#include <json.hpp>

namespace ihoi {

using json = nlohmann::ordered_json;

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "sum") return FusionMode::kSum;
  if (s == "mean") return FusionMode::kMean;
  throw std::runtime_error("unknown fusion mode: " + s);
}

std::string to_string(FusionMode mode) {
  return mode == FusionMode::kSum ? "sum" : "mean";
}

ModelParams make_model(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.num_actions < 1) throw std::runtime_error("make_model: num_actions must be >= 1");
  ModelParams params;
  params.features = cfg.features;
  params.num_actions = cfg.num_actions;
  params.region_mode = cfg.region_mode;
  params.fusion = cfg.fusion;
  const int f = cfg.features.feature_dim();
  Rng rng_pair(Rng::derive(seed, "pairwise_head"));
  Rng rng_h(Rng::derive(seed, "human_stream"));
  Rng rng_o(Rng::derive(seed, "object_stream"));
  Rng rng_g(Rng::derive(seed, "gaze_head"));
  params.pairwise_head = make_dense({f, cfg.num_actions}, 0.0, rng_pair);
  params.human_stream =
      make_dense({cfg.features.d_a, cfg.hidden_dim, cfg.num_actions}, cfg.dropout, rng_h);
  params.object_stream =
      make_dense({cfg.features.d_a, cfg.hidden_dim, cfg.num_actions}, cfg.dropout, rng_o);
  params.gaze_head = make_dense({f, cfg.num_actions}, 0.0, rng_g);
  return params;
}

namespace {

/// Element-wise max of region scores with winner bookkeeping; a single zero
/// feature stands in for the empty region list.
Vector gaze_forward(const ModelParams& params, const std::vector<Vector>& regions,
                    Mode mode, Rng* rng, BranchCaches* caches) {
  std::vector<Vector> inputs = regions;
  if (inputs.empty()) inputs.push_back(Vector::Zero(params.gaze_head.input_dim()));

  Vector best;
  std::vector<int> winner(static_cast<size_t>(params.num_actions), 0);
  for (size_t r = 0; r < inputs.size(); ++r) {
    ForwardCache* cache = nullptr;
    if (caches) {
      caches->gaze.emplace_back();
      cache = &caches->gaze.back();
    }
    const Vector s = sigmoid(forward(params.gaze_head, inputs[r], mode, rng, cache));
    if (r == 0) {
      best = s;
      continue;
    }
    for (Eigen::Index a = 0; a < s.size(); ++a) {
      if (s[a] > best[a]) {
        best[a] = s[a];
        winner[static_cast<size_t>(a)] = static_cast<int>(r);
      }
    }
  }
  if (caches) caches->gaze_winner = std::move(winner);
  return best;
}

}  // namespace

BranchScores sample_forward(const ModelParams& params, const SampleFeatures& sample,
                            Mode mode, Rng* rng, BranchCaches* caches) {
  BranchScores scores;
  if (sample.has_object) {
    const Vector x_pair = pairwise_embedding(sample.x_h, sample.x_o);
    scores.s_ho = sigmoid(forward(params.pairwise_head, x_pair, mode, rng,
                                  caches ? &caches->pairwise : nullptr));
  }
  scores.s_h = sigmoid(forward(params.human_stream, sample.va_h, mode, rng,
                               caches ? &caches->human : nullptr));
  if (sample.has_object) {
    scores.s_o = sigmoid(forward(params.object_stream, sample.va_o, mode, rng,
                                 caches ? &caches->object : nullptr));
  }
  if (params.use_gaze_branch())
    scores.s_gaze = gaze_forward(params, sample.regions, mode, rng, caches);
  else
    scores.s_gaze = Vector::Ones(params.num_actions);
  return scores;
}

BranchScores branch_forward(const ModelParams& params, const Vector& x_h,
                            const Vector& x_o, const std::vector<Vector>& regions,
                            Mode mode, Rng* rng, BranchCaches* caches) {
  SampleFeatures sample;
  sample.has_object = true;
  sample.x_h = x_h;
  sample.x_o = x_o;
  sample.va_h = x_h.segment(params.features.c_obj, params.features.d_a);
  sample.va_o = x_o.segment(params.features.c_obj, params.features.d_a);
  sample.regions = regions;
  return sample_forward(params, sample, mode, rng, caches);
}

Vector fuse(const BranchScores& scores, FusionMode fusion) {
  Vector individual = scores.s_h + scores.s_o;
  if (fusion == FusionMode::kMean) individual *= 0.5;
  return scores.s_ho.cwiseProduct(scores.s_gaze).cwiseProduct(individual);
}

ModelGradients ModelGradients::zeros_like(const ModelParams& params) {
  ModelGradients g;
  g.pairwise = NetGradients::zeros_like(params.pairwise_head);
  g.human = NetGradients::zeros_like(params.human_stream);
  g.object = NetGradients::zeros_like(params.object_stream);
  g.gaze = NetGradients::zeros_like(params.gaze_head);
  return g;
}

BatchLosses total_loss(const ModelParams& params,
                       const std::vector<TrainingSample>& batch, Mode mode,
                       Rng* rng, ModelGradients* grads) {
  const int a_dim = params.num_actions;
  BatchLosses losses;
  losses.rows = static_cast<int>(batch.size());
  for (const auto& s : batch)
    if (s.features.has_object) ++losses.rows_with_object;

  std::vector<BranchScores> all_scores(batch.size());
  std::vector<BranchCaches> all_caches(grads ? batch.size() : 0);

  Matrix rows_h(losses.rows, a_dim), labels_all(losses.rows, a_dim);
  Matrix rows_gaze(losses.rows, a_dim);
  Matrix rows_ho(losses.rows_with_object, a_dim), rows_o(losses.rows_with_object, a_dim);
  Matrix labels_obj(losses.rows_with_object, a_dim);

  int obj_row = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto& sample = batch[i];
    if (sample.labels.size() != a_dim)
      throw std::runtime_error("total_loss: label vector length mismatch");
    all_scores[i] = sample_forward(params, sample.features, mode, rng,
                                   grads ? &all_caches[i] : nullptr);
    const auto row = static_cast<Eigen::Index>(i);
    rows_h.row(row) = all_scores[i].s_h.transpose();
    rows_gaze.row(row) = all_scores[i].s_gaze.transpose();
    labels_all.row(row) = sample.labels.transpose();
    if (sample.features.has_object) {
      rows_ho.row(obj_row) = all_scores[i].s_ho.transpose();
      rows_o.row(obj_row) = all_scores[i].s_o.transpose();
      labels_obj.row(obj_row) = sample.labels.transpose();
      ++obj_row;
    }
  }

  losses.h = losses.rows > 0 ? bce_loss(rows_h, labels_all) : 0;
  if (params.use_gaze_branch() && losses.rows > 0)
    losses.gaze = bce_loss(rows_gaze, labels_all);
  if (losses.rows_with_object > 0) {
    losses.ho = bce_loss(rows_ho, labels_obj);
    losses.o = bce_loss(rows_o, labels_obj);
  }

  if (!grads) return losses;

  // d BCE / d logit = (sigmoid(logit) - y) / M, per included row.
  const Scalar inv_all = losses.rows > 0 ? 1.0 / losses.rows : 0.0;
  const Scalar inv_obj =
      losses.rows_with_object > 0 ? 1.0 / losses.rows_with_object : 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto& sample = batch[i];
    const auto& scores = all_scores[i];
    auto& caches = all_caches[i];

    backward(params.human_stream, caches.human,
             (scores.s_h - sample.labels) * inv_all, grads->human);
    if (sample.features.has_object) {
      backward(params.pairwise_head, caches.pairwise,
               (scores.s_ho - sample.labels) * inv_obj, grads->pairwise);
      backward(params.object_stream, caches.object,
               (scores.s_o - sample.labels) * inv_obj, grads->object);
    }
    if (params.use_gaze_branch()) {
      // the max routes each action's gradient to its winning region
      const Vector d_gaze = (scores.s_gaze - sample.labels) * inv_all;
      for (size_t r = 0; r < caches.gaze.size(); ++r) {
        Vector up = Vector::Zero(a_dim);
        bool any = false;
        for (Eigen::Index a = 0; a < a_dim; ++a) {
          if (caches.gaze_winner[static_cast<size_t>(a)] == static_cast<int>(r)) {
            up[a] = d_gaze[a];
            any = true;
          }
        }
        if (any) backward(params.gaze_head, caches.gaze[r], up, grads->gaze);
      }
    }
  }
  return losses;
}

ModelOptimizer make_model_optimizer(const ModelParams& params,
                                    const SgdHyperparams& hyper) {
  return ModelOptimizer{make_optimizer(params.pairwise_head, hyper),
                        make_optimizer(params.human_stream, hyper),
                        make_optimizer(params.object_stream, hyper),
                        make_optimizer(params.gaze_head, hyper)};
}

void model_sgd_step(ModelParams& params, const ModelGradients& grads,
                    ModelOptimizer& optimizer) {
  sgd_step(params.pairwise_head, grads.pairwise, optimizer.pairwise);
  sgd_step(params.human_stream, grads.human, optimizer.human);
  sgd_step(params.object_stream, grads.object, optimizer.object);
  sgd_step(params.gaze_head, grads.gaze, optimizer.gaze);
}

GradCheckReport model_grad_check(const ModelParams& params,
                                 const std::vector<TrainingSample>& batch,
                                 Scalar tolerance, Scalar step) {
  ModelGradients analytic = ModelGradients::zeros_like(params);
  total_loss(params, batch, Mode::kEval, nullptr, &analytic);

  ModelParams probe = params;
  GradCheckReport report;
  report.tolerance = tolerance;

  const auto check_entry = [&](Scalar& param, Scalar analytic_grad) {
    const Scalar saved = param;
    param = saved + step;
    const Scalar up = total_loss(probe, batch, Mode::kEval, nullptr).total();
    param = saved - step;
    const Scalar down = total_loss(probe, batch, Mode::kEval, nullptr).total();
    param = saved;
    const Scalar numeric = (up - down) / (2.0 * step);
    const Scalar denom =
        std::max({Scalar{1}, std::abs(analytic_grad), std::abs(numeric)});
    report.max_relative_error =
        std::max(report.max_relative_error, std::abs(analytic_grad - numeric) / denom);
    ++report.parameters_checked;
  };

  const auto check_net = [&](DenseNet& net, const NetGradients& g) {
    for (size_t l = 0; l < net.num_layers(); ++l) {
      for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
        for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c)
          check_entry(net.weights[l](r, c), g.weights[l](r, c));
      for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
        check_entry(net.biases[l][i], g.biases[l][i]);
    }
  };
  check_net(probe.pairwise_head, analytic.pairwise);
  check_net(probe.human_stream, analytic.human);
  check_net(probe.object_stream, analytic.object);
  check_net(probe.gaze_head, analytic.gaze);

  report.passed = report.max_relative_error < tolerance;
  return report;
}

namespace {

/// BCE-through-sigmoid probe over a fixed input/label pair.
LossProbe bce_probe(const Vector& input, const Vector& labels) {
  LossProbe probe;
  probe.value = [input, labels](const DenseNet& net) {
    const Vector s = sigmoid(forward(net, input, Mode::kEval, nullptr));
    Matrix sm(1, s.size()), lm(1, s.size());
    sm.row(0) = s.transpose();
    lm.row(0) = labels.transpose();
    return bce_loss(sm, lm);
  };
  probe.gradients = [input, labels](const DenseNet& net) {
    ForwardCache cache;
    const Vector s = sigmoid(forward(net, input, Mode::kEval, nullptr, &cache));
    NetGradients grads = NetGradients::zeros_like(net);
    backward(net, cache, s - labels, grads);
    return grads;
  };
  return probe;
}

std::vector<TrainingSample> random_batch(const ModelConfig& cfg, Rng& rng) {
  const int f = cfg.features.feature_dim();
  std::vector<TrainingSample> batch;
  for (int i = 0; i < 3; ++i) {
    TrainingSample sample;
    sample.features.has_object = i < 2;
    sample.features.va_h = rng.normal_vector(cfg.features.d_a);
    if (sample.features.has_object) {
      sample.features.x_h = rng.normal_vector(f);
      sample.features.x_o = rng.normal_vector(f);
      sample.features.va_o = rng.normal_vector(cfg.features.d_a);
      for (int r = 0; r < 2 - i; ++r)
        sample.features.regions.push_back(rng.normal_vector(f));
    }
    sample.labels = Vector::Zero(cfg.num_actions);
    for (Eigen::Index a = 0; a < sample.labels.size(); ++a)
      sample.labels[a] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    batch.push_back(std::move(sample));
  }
  return batch;
}

}  // namespace

GradCheckReport run_gradient_suite(int num_seeds, std::uint64_t base_seed,
                                   Scalar tolerance) {
  GradCheckReport aggregate;
  aggregate.tolerance = tolerance;
  aggregate.passed = true;

  for (int s = 0; s < num_seeds; ++s) {
    const std::uint64_t seed = Rng::derive(base_seed, static_cast<std::uint64_t>(s));
    Rng rng(seed);

    // standalone two-FC stream with a BCE head
    DenseNet stream = make_dense({8, 4, 3}, 0.0, rng);
    const auto stream_report =
        grad_check(stream, bce_probe(rng.normal_vector(8), Vector::Ones(3)), tolerance);
    aggregate.max_relative_error =
        std::max(aggregate.max_relative_error, stream_report.max_relative_error);
    aggregate.parameters_checked += stream_report.parameters_checked;

    // full model at the desk-scale configuration, dropout off for the check
    ModelConfig cfg;
    cfg.num_actions = 6;
    cfg.hidden_dim = 16;
    cfg.dropout = 0.0;
    ModelParams params = make_model(cfg, seed);
    const auto model_report =
        model_grad_check(params, random_batch(cfg, rng), tolerance);
    aggregate.max_relative_error =
        std::max(aggregate.max_relative_error, model_report.max_relative_error);
    aggregate.parameters_checked += model_report.parameters_checked;
  }
  aggregate.passed = aggregate.max_relative_error < tolerance;
  return aggregate;
}

// -- checkpoint I/O ---------------------------------------------------------

namespace {

json net_to_json(const DenseNet& net, bool with_weights = true) {
  json j;
  j["dropout_rate"] = net.dropout_rate;
  j["layers"] = json::array();
  for (size_t l = 0; l < net.num_layers(); ++l) {
    json jl;
    jl["out"] = net.weights[l].rows();
    jl["in"] = net.weights[l].cols();
    if (with_weights) {
      json w = json::array();
      for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
        for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c)
          w.push_back(net.weights[l](r, c));
      jl["weights"] = std::move(w);  // row-major
      json b = json::array();
      for (Eigen::Index i = 0; i < net.biases[l].size(); ++i)
        b.push_back(net.biases[l][i]);
      jl["bias"] = std::move(b);
    }
    j["layers"].push_back(std::move(jl));
  }
  return j;
}

DenseNet net_from_json(const json& j) {
  DenseNet net;
  net.dropout_rate = j.at("dropout_rate").get<Scalar>();
  for (const auto& jl : j.at("layers")) {
    const auto out = jl.at("out").get<Eigen::Index>();
    const auto in = jl.at("in").get<Eigen::Index>();
    const auto& w = jl.at("weights");
    const auto& b = jl.at("bias");
    if (static_cast<Eigen::Index>(w.size()) != out * in ||
        static_cast<Eigen::Index>(b.size()) != out)
      throw std::runtime_error("checkpoint: layer shape mismatch");
    Matrix wm(out, in);
    Eigen::Index n = 0;
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) wm(r, c) = w[static_cast<size_t>(n++)].get<Scalar>();
    Vector bv(out);
    for (Eigen::Index i = 0; i < out; ++i) bv[i] = b[static_cast<size_t>(i)].get<Scalar>();
    net.weights.push_back(std::move(wm));
    net.biases.push_back(std::move(bv));
  }
  return net;
}

json velocities_to_json(const OptimizerState& state) {
  json j = json::array();
  for (size_t l = 0; l < state.weight_velocity.size(); ++l) {
    json jl;
    json w = json::array();
    for (Eigen::Index r = 0; r < state.weight_velocity[l].rows(); ++r)
      for (Eigen::Index c = 0; c < state.weight_velocity[l].cols(); ++c)
        w.push_back(state.weight_velocity[l](r, c));
    jl["weights"] = std::move(w);
    json b = json::array();
    for (Eigen::Index i = 0; i < state.bias_velocity[l].size(); ++i)
      b.push_back(state.bias_velocity[l][i]);
    jl["bias"] = std::move(b);
    j.push_back(std::move(jl));
  }
  return j;
}

void velocities_from_json(const json& j, OptimizerState& state) {
  for (size_t l = 0; l < state.weight_velocity.size(); ++l) {
    const auto& jl = j.at(l);
    const auto& w = jl.at("weights");
    const auto& b = jl.at("bias");
    Eigen::Index n = 0;
    for (Eigen::Index r = 0; r < state.weight_velocity[l].rows(); ++r)
      for (Eigen::Index c = 0; c < state.weight_velocity[l].cols(); ++c)
        state.weight_velocity[l](r, c) = w.at(static_cast<size_t>(n++)).get<Scalar>();
    for (Eigen::Index i = 0; i < state.bias_velocity[l].size(); ++i)
      state.bias_velocity[l][i] = b.at(static_cast<size_t>(i)).get<Scalar>();
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const ModelOptimizer* optimizer, const Config& config,
                     std::uint64_t vocab_hash) {
  json j;
  j["format_version"] = 1;
  j["config_hash"] = fmt::format("{:016x}", config.hash());
  j["vocab_hash"] = fmt::format("{:016x}", vocab_hash);
  j["num_actions"] = params.num_actions;
  j["config"] = json::object();
  for (const auto& [key, value] : config.values()) j["config"][key] = value;
  j["nets"]["pairwise_head"] = net_to_json(params.pairwise_head);
  j["nets"]["human_stream"] = net_to_json(params.human_stream);
  j["nets"]["object_stream"] = net_to_json(params.object_stream);
  j["nets"]["gaze_head"] = net_to_json(params.gaze_head);
  if (optimizer) {
    json jo;
    jo["learning_rate"] = optimizer->pairwise.hyper.learning_rate;
    jo["momentum"] = optimizer->pairwise.hyper.momentum;
    jo["weight_decay"] = optimizer->pairwise.hyper.weight_decay;
    jo["velocities"]["pairwise_head"] = velocities_to_json(optimizer->pairwise);
    jo["velocities"]["human_stream"] = velocities_to_json(optimizer->human);
    jo["velocities"]["object_stream"] = velocities_to_json(optimizer->object);
    jo["velocities"]["gaze_head"] = velocities_to_json(optimizer->gaze);
    j["optimizer"] = std::move(jo);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", path, e.what()));
  }
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("checkpoint: unsupported format version");

  Checkpoint ckpt;
  for (const auto& [key, value] : j.at("config").items())
    ckpt.config.set(key, value.get<std::string>());
  if (fmt::format("{:016x}", ckpt.config.hash()) != j.at("config_hash").get<std::string>())
    throw std::runtime_error("checkpoint: config hash mismatch");
  ckpt.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);

  ckpt.params.features.c_obj = ckpt.config.get_int("feature.c_obj");
  ckpt.params.features.d_a = ckpt.config.get_int("feature.d_a");
  ckpt.params.features.human_category = ckpt.config.get_int("feature.human_category");
  ckpt.params.features.pose_mode =
      pose_mode_from_string(ckpt.config.get("feature.pose_mode"));
  ckpt.params.num_actions = j.at("num_actions").get<int>();
  ckpt.params.region_mode = region_mode_from_string(ckpt.config.get("regions.mode"));
  ckpt.params.fusion = fusion_mode_from_string(ckpt.config.get("model.fusion_ho"));
  ckpt.params.pairwise_head = net_from_json(j.at("nets").at("pairwise_head"));
  ckpt.params.human_stream = net_from_json(j.at("nets").at("human_stream"));
  ckpt.params.object_stream = net_from_json(j.at("nets").at("object_stream"));
  ckpt.params.gaze_head = net_from_json(j.at("nets").at("gaze_head"));

  if (j.contains("optimizer")) {
    const auto& jo = j.at("optimizer");
    SgdHyperparams hyper{jo.at("learning_rate").get<Scalar>(),
                         jo.at("momentum").get<Scalar>(),
                         jo.at("weight_decay").get<Scalar>()};
    ModelOptimizer opt = make_model_optimizer(ckpt.params, hyper);
    velocities_from_json(jo.at("velocities").at("pairwise_head"), opt.pairwise);
    velocities_from_json(jo.at("velocities").at("human_stream"), opt.human);
    velocities_from_json(jo.at("velocities").at("object_stream"), opt.object);
    velocities_from_json(jo.at("velocities").at("gaze_head"), opt.gaze);
    ckpt.optimizer = std::move(opt);
  }
  return ckpt;
}

}  // namespace ihoi
