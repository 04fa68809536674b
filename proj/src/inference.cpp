#include "ihoi/inference.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include <fmt/core.h>
#include <json.hpp>

namespace ihoi {

using json = nlohmann::ordered_json;

InferenceMode inference_mode_from_string(const std::string& s) {
  if (s == "vcoco") return InferenceMode::kVcoco;
  if (s == "hico") return InferenceMode::kHico;
  throw std::runtime_error("unknown inference mode: " + s);
}

namespace {

std::vector<Vector> region_features(const ModelParams& params, const Scene& scene,
                                    const DetectedInstance& human, int k) {
  std::vector<Vector> feats;
  for (int rid : regions_for(scene, human, k, params.region_mode)) {
    const DetectedInstance* region = scene.find(rid);
    if (region) feats.push_back(region_feature(params.features, scene, *region, human));
  }
  return feats;
}

Vector pair_scores(const ModelParams& params, const Scene& scene,
                   const DetectedInstance& human, const DetectedInstance& object,
                   const std::vector<Vector>& regions) {
  const Vector x_h = human_feature(params.features, scene, human, object.box);
  const Vector x_o = object_feature(params.features, scene, object, human);
  const BranchScores scores =
      branch_forward(params, x_h, x_o, regions, Mode::kEval, nullptr);
  return human.detection_score * object.detection_score *
         fuse(scores, params.fusion);
}

int argmax_category(const DetectedInstance& inst) {
  Eigen::Index best = 0;
  inst.category_scores.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

Vector score_pair(const ModelParams& params, const Scene& scene,
                  const DetectedInstance& human, const DetectedInstance& object,
                  int k) {
  return pair_scores(params, scene, human, object,
                     region_features(params, scene, human, k));
}

Vector score_human_only(const ModelParams& params, const Scene& scene,
                        const DetectedInstance& human,
                        const ActionVocabulary& vocab, int k) {
  SampleFeatures sample;
  sample.has_object = false;
  sample.va_h = human.appearance;
  sample.regions = region_features(params, scene, human, k);
  const BranchScores scores = sample_forward(params, sample, Mode::kEval, nullptr);
  Vector out = Vector::Zero(params.num_actions);
  for (int a = 0; a < params.num_actions; ++a) {
    if (vocab.slot(a).requires_object) continue;
    out[a] = human.detection_score * scores.s_gaze[a] * scores.s_h[a];
  }
  return out;
}

std::vector<TripletPrediction> detect(const ModelParams& params, const Scene& scene,
                                      const ActionVocabulary& vocab,
                                      InferenceMode mode, int max_per_pair, int k) {
  if (vocab.size() != params.num_actions)
    throw std::runtime_error(
        fmt::format("detect: vocabulary has {} slots but the model expects {}",
                    vocab.size(), params.num_actions));

  std::vector<TripletPrediction> predictions;
  for (const auto& human : scene.instances) {
    if (!is_human(human, params.features.human_category)) continue;
    const std::vector<Vector> regions = region_features(params, scene, human, k);

    // triplet scores per candidate object, shared across slots
    std::map<int, Vector> cached;
    const auto scores_for = [&](const DetectedInstance& object) -> const Vector& {
      auto it = cached.find(object.id);
      if (it == cached.end())
        it = cached.emplace(object.id, pair_scores(params, scene, human, object, regions)).first;
      return it->second;
    };

    for (int a = 0; a < vocab.size(); ++a) {
      const ActionSlot& slot = vocab.slot(a);
      if (!slot.requires_object) continue;

      struct Candidate {
        const DetectedInstance* object;
        int category;
        Scalar score;
      };
      std::vector<Candidate> candidates;
      for (const auto& object : scene.instances) {
        if (object.id == human.id) continue;
        const int category = argmax_category(object);
        if (!slot.relevant_categories.contains(category)) continue;
        candidates.push_back({&object, category, scores_for(object)[a]});
      }

      const auto emit = [&](const Candidate& c) {
        predictions.push_back({scene.scene_id, human.box, c.object->box, a, c.score});
      };
      if (mode == InferenceMode::kVcoco) {
        // best-scoring object within each relevant category
        std::map<int, const Candidate*> best;
        for (const auto& c : candidates) {
          const auto it = best.find(c.category);
          if (it == best.end() || c.score > it->second->score ||
              (c.score == it->second->score && c.object->id < it->second->object->id))
            best[c.category] = &c;
        }
        for (const auto& [category, c] : best) emit(*c);
      } else {
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& x, const Candidate& y) {
                           if (x.score != y.score) return x.score > y.score;
                           return x.object->id < y.object->id;
                         });
        if (static_cast<int>(candidates.size()) > max_per_pair)
          candidates.resize(static_cast<size_t>(max_per_pair));
        for (const auto& c : candidates) emit(c);
      }
    }

    const Vector human_only = score_human_only(params, scene, human, vocab, k);
    for (int a = 0; a < vocab.size(); ++a) {
      if (vocab.slot(a).requires_object) continue;
      predictions.push_back({scene.scene_id, human.box, std::nullopt, a, human_only[a]});
    }
  }
  return predictions;
}

void save_predictions(const std::string& path,
                      const std::vector<TripletPrediction>& predictions) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write predictions: " + path);
  for (const auto& p : predictions) {
    json j;
    j["scene_id"] = p.scene_id;
    j["human_box"] = json::array({p.human_box.x1, p.human_box.y1, p.human_box.x2, p.human_box.y2});
    j["object_box"] = p.object_box
                          ? json(json::array({p.object_box->x1, p.object_box->y1,
                                              p.object_box->x2, p.object_box->y2}))
                          : json(nullptr);
    j["action_role_id"] = p.action_role_id;
    j["score"] = p.score;
    out << j.dump() << '\n';
  }
}

std::vector<TripletPrediction> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions: " + path);
  std::vector<TripletPrediction> predictions;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      TripletPrediction p;
      p.scene_id = j.at("scene_id").get<std::string>();
      const auto& hb = j.at("human_box");
      p.human_box = {hb[0].get<Scalar>(), hb[1].get<Scalar>(), hb[2].get<Scalar>(),
                     hb[3].get<Scalar>()};
      if (!j.at("object_box").is_null()) {
        const auto& ob = j.at("object_box");
        p.object_box = BoundingBox{ob[0].get<Scalar>(), ob[1].get<Scalar>(),
                                   ob[2].get<Scalar>(), ob[3].get<Scalar>()};
      }
      p.action_role_id = j.at("action_role_id").get<int>();
      p.score = j.at("score").get<Scalar>();
      predictions.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
  }
  return predictions;
}

}  // namespace ihoi
