#include "ihoi/scene_io.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/core.h>
#include <json.hpp>

namespace ihoi {

using json = nlohmann::ordered_json;

namespace {

json box_to_json(const BoundingBox& b) {
  return json::array({b.x1, b.y1, b.x2, b.y2});
}

BoundingBox box_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 4)
    throw std::runtime_error(field + ": expected [x1, y1, x2, y2]");
  return BoundingBox{j[0].get<Scalar>(), j[1].get<Scalar>(), j[2].get<Scalar>(),
                     j[3].get<Scalar>()};
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw std::runtime_error(field + ": expected an array");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<Scalar>();
  return v;
}

json scene_to_json(const Scene& s) {
  json j;
  j["scene_id"] = s.scene_id;
  j["image_width"] = s.image_width;
  j["image_height"] = s.image_height;
  j["instances"] = json::array();
  for (const auto& inst : s.instances) {
    json ji;
    ji["id"] = inst.id;
    ji["box"] = box_to_json(inst.box);
    ji["detection_score"] = inst.detection_score;
    ji["category_scores"] = vector_to_json(inst.category_scores);
    ji["appearance"] = vector_to_json(inst.appearance);
    if (inst.joints) {
      json pos = json::array();
      json pres = json::array();
      for (int k = 0; k < kNumJoints; ++k) {
        pos.push_back(json::array(
            {inst.joints->positions(k, 0), inst.joints->positions(k, 1)}));
        pres.push_back(inst.joints->present[static_cast<size_t>(k)]);
      }
      ji["joints"] = json{{"positions", pos}, {"present", pres}};
    } else {
      ji["joints"] = nullptr;
    }
    j["instances"].push_back(std::move(ji));
  }
  j["gaze_maps"] = json::object();
  for (const auto& [id, map] : s.gaze_maps) {
    const std::string key = std::to_string(id);
    if (!map) {
      j["gaze_maps"][key] = nullptr;
      continue;
    }
    json jm;
    jm["height"] = map->grid_height();
    jm["width"] = map->grid_width();
    json vals = json::array();
    for (Eigen::Index r = 0; r < map->values.rows(); ++r)
      for (Eigen::Index c = 0; c < map->values.cols(); ++c)
        vals.push_back(map->values(r, c));
    jm["values"] = std::move(vals);
    jm["image_width"] = map->image_width;
    jm["image_height"] = map->image_height;
    j["gaze_maps"][key] = std::move(jm);
  }
  j["ground_truth"] = json::array();
  for (const auto& gt : s.ground_truth) {
    json jg;
    jg["human_box"] = box_to_json(gt.human_box);
    jg["object_box"] = gt.object_box ? box_to_json(*gt.object_box) : json(nullptr);
    jg["action_role_id"] = gt.action_role_id;
    j["ground_truth"].push_back(std::move(jg));
  }
  return j;
}

Scene scene_from_json(const json& j) {
  Scene s;
  s.scene_id = j.at("scene_id").get<std::string>();
  s.image_width = j.at("image_width").get<Scalar>();
  s.image_height = j.at("image_height").get<Scalar>();
  for (const auto& ji : j.at("instances")) {
    DetectedInstance inst;
    inst.id = ji.at("id").get<int>();
    inst.box = box_from_json(ji.at("box"), "box");
    inst.detection_score = ji.at("detection_score").get<Scalar>();
    inst.category_scores = vector_from_json(ji.at("category_scores"), "category_scores");
    inst.appearance = vector_from_json(ji.at("appearance"), "appearance");
    const auto& jj = ji.at("joints");
    if (!jj.is_null()) {
      PoseJoints joints;
      const auto& pos = jj.at("positions");
      const auto& pres = jj.at("present");
      if (pos.size() != kNumJoints || pres.size() != kNumJoints)
        throw std::runtime_error("joints: expected exactly 8 positions and 8 present flags");
      for (int k = 0; k < kNumJoints; ++k) {
        joints.positions(k, 0) = pos[static_cast<size_t>(k)][0].get<Scalar>();
        joints.positions(k, 1) = pos[static_cast<size_t>(k)][1].get<Scalar>();
        joints.present[static_cast<size_t>(k)] = pres[static_cast<size_t>(k)].get<bool>();
      }
      inst.joints = joints;
    }
    s.instances.push_back(std::move(inst));
  }
  for (const auto& [key, jm] : j.at("gaze_maps").items()) {
    const int id = std::stoi(key);
    if (jm.is_null()) {
      s.gaze_maps[id] = std::nullopt;
      continue;
    }
    GazeMap map;
    const auto rows = jm.at("height").get<Eigen::Index>();
    const auto cols = jm.at("width").get<Eigen::Index>();
    const auto& vals = jm.at("values");
    if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(vals.size()) != rows * cols)
      throw std::runtime_error(fmt::format(
          "gaze_maps[{}]: values has {} entries, expected height*width = {}",
          key, vals.size(), rows * cols));
    map.values.resize(rows, cols);
    Eigen::Index n = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        map.values(r, c) = vals[static_cast<size_t>(n++)].get<Scalar>();
    map.image_width = jm.at("image_width").get<Scalar>();
    map.image_height = jm.at("image_height").get<Scalar>();
    s.gaze_maps[id] = std::move(map);
  }
  for (const auto& jg : j.at("ground_truth")) {
    GroundTruthHOI gt;
    gt.human_box = box_from_json(jg.at("human_box"), "human_box");
    if (!jg.at("object_box").is_null())
      gt.object_box = box_from_json(jg.at("object_box"), "object_box");
    gt.action_role_id = jg.at("action_role_id").get<int>();
    s.ground_truth.push_back(std::move(gt));
  }
  return s;
}

}  // namespace

std::vector<Scene> load_scenes(const std::string& path, int c_obj, int d_a) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  std::vector<Scene> scenes;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Scene s = scene_from_json(json::parse(line));
      validate_scene(s, c_obj, d_a);
      scenes.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(
          fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
  }
  return scenes;
}

void save_scenes(const std::string& path, const std::vector<Scene>& scenes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  for (const auto& s : scenes) out << scene_to_json(s).dump() << '\n';
}

ActionVocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("{}: {}", path, e.what()));
  }
  ActionVocabulary vocab;
  for (const auto& js : j) {
    ActionSlot slot;
    slot.action = js.at("action").get<std::string>();
    slot.role = js.at("role").get<std::string>();
    slot.requires_object = js.at("requires_object").get<bool>();
    for (const auto& c : js.at("relevant_categories"))
      slot.relevant_categories.insert(c.get<int>());
    vocab.slots.push_back(std::move(slot));
  }
  validate_vocabulary(vocab);
  return vocab;
}

namespace {

json vocabulary_to_json(const ActionVocabulary& vocab) {
  json j = json::array();
  for (const auto& slot : vocab.slots) {
    json js;
    js["action"] = slot.action;
    js["role"] = slot.role;
    js["requires_object"] = slot.requires_object;
    js["relevant_categories"] = json::array();
    for (int c : slot.relevant_categories) js["relevant_categories"].push_back(c);
    j.push_back(std::move(js));
  }
  return j;
}

}  // namespace

void save_vocabulary(const std::string& path, const ActionVocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  out << vocabulary_to_json(vocab).dump(2) << '\n';
}

std::string vocabulary_canonical(const ActionVocabulary& vocab) {
  return vocabulary_to_json(vocab).dump();
}

}  // namespace ihoi
