#include "ihoi/config.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/core.h>

#include "ihoi/rng.hpp"

namespace ihoi {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"seed", "0", "master random seed"},
      {"feature.c_obj", "8", "number of object categories (category_scores length)"},
      {"feature.d_a", "16", "appearance vector length"},
      {"feature.human_category", "0", "category index that marks a human"},
      {"feature.pose_mode", "distances",
       "pose encoding: distances | locations | none"},
      {"model.hidden_dim", "64", "hidden width of the human/object streams"},
      {"model.dropout", "0.5", "dropout rate inside the two-FC streams"},
      {"model.fusion_ho", "sum", "individual-branch fusion: sum | mean"},
      {"regions.k", "5", "number of context regions per human"},
      {"regions.mode", "gazed", "region selection: gazed | sorted | none"},
      {"filter.human_thresh", "0.8", "keep humans with detection score >= this"},
      {"filter.object_thresh", "0.4", "keep objects with detection score >= this"},
      {"train.epochs", "20", "training epochs"},
      {"train.batch_size", "32", "mini-batch size (image-centric)"},
      {"train.learning_rate", "0.001", "SGD learning rate"},
      {"train.momentum", "0.9", "SGD momentum"},
      {"train.weight_decay", "0.0005", "SGD weight decay"},
      {"train.negative_ratio", "2.0", "mined negatives per positive"},
      {"train.mining", "misgroup",
       "hard negative mining: misgroup | alternative | none"},
      {"infer.max_per_pair", "10", "objects kept per human-action pair (hico mode)"},
      {"eval.ap", "envelope", "AP interpolation: envelope | eleven_point"},
      {"eval.rare_threshold", "0",
       "training GT count below which a slot is rare (0 disables splits)"},
      {"synth.train_scenes", "200", "generated training scenes"},
      {"synth.test_scenes", "100", "generated test scenes"},
      {"synth.image_width", "640", "generated image width in pixels"},
      {"synth.image_height", "480", "generated image height in pixels"},
      {"synth.gaze_grid_width", "40", "gaze map grid columns"},
      {"synth.gaze_grid_height", "30", "gaze map grid rows"},
      {"synth.humans_min", "1", "min humans per scene"},
      {"synth.humans_max", "2", "max humans per scene"},
      {"synth.background_min", "4", "min background objects per scene"},
      {"synth.background_max", "6", "max background objects per scene"},
      {"synth.distractor_rate", "0.5",
       "probability a scene gains a same-category distractor per human"},
      {"synth.gaze_dropout", "0.1", "probability a human has no gaze map"},
      {"synth.appearance_sep_human", "1.2",
       "class-mean separation of human appearance vectors"},
      {"synth.appearance_sep_object", "2.5",
       "class-mean separation of object appearance vectors"},
      {"synth.gaze_concentration", "0.9",
       "fraction of gaze mass concentrated on the interacted object"},
      {"synth.pose_signal", "1.0",
       "strength of the pose/placement correlation with the action"},
      {"synth.box_jitter", "0.0", "detection box jitter in pixels"},
  };
  return schema;
}

namespace {

const ConfigKey* find_key(const std::string& key) {
  for (const auto& k : config_schema())
    if (k.key == key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() {
  for (const auto& k : config_schema()) values_[k.key] = k.default_value;
}

Config Config::from_file(const std::string& path) {
  Config cfg;
  cfg.apply_file(path);
  return cfg;
}

void Config::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(
          fmt::format("{}:{}: expected 'key = value'", path, line_no));
    try {
      set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
  }
}

void Config::set(const std::string& key, const std::string& value) {
  if (find_key(key) == nullptr)
    throw std::runtime_error("unknown config key: " + key);
  values_[key] = value;
}

std::string Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const ConfigKey* k = find_key(key);
  if (k == nullptr) throw std::runtime_error("unknown config key: " + key);
  return k->default_value;
}

int Config::get_int(const std::string& key) const {
  const std::string v = get(key);
  try {
    size_t pos = 0;
    const int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error(fmt::format("config key {}: '{}' is not an integer", key, v));
  }
}

double Config::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::runtime_error(fmt::format("config key {}: '{}' is not a number", key, v));
  }
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& k : config_schema())
    out += fmt::format("{} = {}\n", k.key, get(k.key));
  return out;
}

std::uint64_t Config::hash() const { return fnv1a(serialize()); }

}  // namespace ihoi
