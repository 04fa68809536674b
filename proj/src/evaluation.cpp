#include "ihoi/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <tuple>

#include <fmt/core.h>
#include <json.hpp>

namespace ihoi {

using json = nlohmann::ordered_json;

Scalar iou(const BoundingBox& a, const BoundingBox& b) {
  const Scalar ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const Scalar iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0 || iy <= 0) return 0;
  const Scalar inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

ApInterpolation ap_interpolation_from_string(const std::string& s) {
  if (s == "envelope") return ApInterpolation::kEnvelope;
  if (s == "eleven_point") return ApInterpolation::kElevenPoint;
  throw std::runtime_error("unknown AP interpolation: " + s);
}

namespace {

std::tuple<Scalar, Scalar, Scalar, Scalar> box_key(const std::optional<BoundingBox>& b) {
  if (!b) return {0, 0, 0, 0};
  return {b->x1, b->y1, b->x2, b->y2};
}

/// Content-based ordering for equal scores keeps the metric independent of
/// prediction file order.
bool prediction_before(const SlotPrediction& a, const SlotPrediction& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.scene_id != b.scene_id) return a.scene_id < b.scene_id;
  const auto ka = box_key(a.human_box), kb = box_key(b.human_box);
  if (ka != kb) return ka < kb;
  return box_key(a.object_box) < box_key(b.object_box);
}

Scalar area_under_pr(const std::vector<bool>& tp_flags, size_t gt_count,
                     ApInterpolation interp) {
  const size_t n = tp_flags.size();
  std::vector<Scalar> precision(n), recall(n);
  size_t tp = 0;
  for (size_t i = 0; i < n; ++i) {
    if (tp_flags[i]) ++tp;
    precision[i] = static_cast<Scalar>(tp) / static_cast<Scalar>(i + 1);
    recall[i] = static_cast<Scalar>(tp) / static_cast<Scalar>(gt_count);
  }
  // precision envelope: running max from the right
  std::vector<Scalar> envelope = precision;
  for (size_t i = n; i-- > 1;)
    envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);

  if (interp == ApInterpolation::kElevenPoint) {
    Scalar ap = 0;
    for (int j = 0; j <= 10; ++j) {
      const Scalar level = static_cast<Scalar>(j) / 10.0;
      Scalar best = 0;
      for (size_t i = 0; i < n; ++i)
        if (recall[i] >= level) {
          best = envelope[i];
          break;
        }
      ap += best / 11.0;
    }
    return ap;
  }

  Scalar ap = 0;
  Scalar prev_recall = 0;
  for (size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * envelope[i];
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

Scalar match_and_ap(std::vector<SlotPrediction> predictions,
                    const std::vector<SlotGroundTruth>& ground_truth,
                    bool requires_object, ApInterpolation interp) {
  if (ground_truth.empty()) return 0;
  std::stable_sort(predictions.begin(), predictions.end(), prediction_before);

  std::vector<bool> claimed(ground_truth.size(), false);
  std::vector<bool> tp_flags(predictions.size(), false);
  for (size_t p = 0; p < predictions.size(); ++p) {
    const auto& pred = predictions[p];
    Scalar best_quality = -1;
    size_t best_gt = 0;
    for (size_t g = 0; g < ground_truth.size(); ++g) {
      if (claimed[g] || ground_truth[g].scene_id != pred.scene_id) continue;
      const Scalar iou_h = iou(pred.human_box, ground_truth[g].human_box);
      if (iou_h < 0.5) continue;
      Scalar quality = iou_h;
      if (requires_object) {
        if (!pred.object_box || !ground_truth[g].object_box) continue;
        const Scalar iou_o = iou(*pred.object_box, *ground_truth[g].object_box);
        if (iou_o < 0.5) continue;
        quality = std::min(iou_h, iou_o);
      }
      if (quality > best_quality) {
        best_quality = quality;
        best_gt = g;
      }
    }
    if (best_quality >= 0) {
      claimed[best_gt] = true;
      tp_flags[p] = true;
    }
  }
  return area_under_pr(tp_flags, ground_truth.size(), interp);
}

EvalReport evaluate(const std::vector<TripletPrediction>& predictions,
                    const std::vector<Scene>& scenes, const ActionVocabulary& vocab,
                    const EvalOptions& options) {
  std::map<std::string, const Scene*> by_id;
  for (const auto& s : scenes) by_id[s.scene_id] = &s;

  std::vector<std::vector<SlotPrediction>> slot_preds(static_cast<size_t>(vocab.size()));
  for (const auto& p : predictions) {
    if (!by_id.contains(p.scene_id))
      throw std::runtime_error("evaluate: prediction references unknown scene " +
                               p.scene_id);
    if (p.action_role_id < 0 || p.action_role_id >= vocab.size())
      throw std::runtime_error(
          fmt::format("evaluate: action_role_id {} outside vocabulary", p.action_role_id));
    const bool needs_object = vocab.slot(p.action_role_id).requires_object;
    if (needs_object != p.object_box.has_value())
      throw std::runtime_error(fmt::format(
          "evaluate: prediction for slot {} has object_box {}", p.action_role_id,
          p.object_box ? "but the slot takes none" : "missing"));
    slot_preds[static_cast<size_t>(p.action_role_id)].push_back(
        {p.scene_id, p.human_box, p.object_box, p.score});
  }

  std::vector<std::vector<SlotGroundTruth>> slot_gts(static_cast<size_t>(vocab.size()));
  for (const auto& scene : scenes) {
    for (const auto& gt : scene.ground_truth) {
      if (gt.action_role_id < 0 || gt.action_role_id >= vocab.size())
        throw std::runtime_error(
            fmt::format("evaluate: ground truth action_role_id {} outside vocabulary",
                        gt.action_role_id));
      slot_gts[static_cast<size_t>(gt.action_role_id)].push_back(
          {scene.scene_id, gt.human_box, gt.object_box});
    }
  }

  EvalReport report;
  Scalar ap_sum = 0;
  for (int a = 0; a < vocab.size(); ++a) {
    const auto idx = static_cast<size_t>(a);
    SlotReport slot;
    slot.slot_id = a;
    slot.action = vocab.slot(a).action;
    slot.role = vocab.slot(a).role;
    slot.gt_count = static_cast<int>(slot_gts[idx].size());
    slot.prediction_count = static_cast<int>(slot_preds[idx].size());
    slot.ap = match_and_ap(slot_preds[idx], slot_gts[idx],
                           vocab.slot(a).requires_object, options.interpolation);
    if (slot.gt_count > 0) {
      ap_sum += slot.ap;
      ++report.slots_with_gt;
    }
    report.slots.push_back(std::move(slot));
  }
  report.map_role = report.slots_with_gt > 0
                        ? ap_sum / static_cast<Scalar>(report.slots_with_gt)
                        : 0;

  if (options.rare_threshold > 0 && !options.train_gt_counts.empty()) {
    Scalar rare_sum = 0, non_rare_sum = 0;
    int rare_n = 0, non_rare_n = 0;
    for (const auto& slot : report.slots) {
      if (slot.gt_count == 0) continue;
      const auto it = options.train_gt_counts.find(slot.slot_id);
      const int train_count = it == options.train_gt_counts.end() ? 0 : it->second;
      if (train_count < options.rare_threshold) {
        rare_sum += slot.ap;
        ++rare_n;
      } else {
        non_rare_sum += slot.ap;
        ++non_rare_n;
      }
    }
    report.map_full = report.map_role;
    report.map_rare = rare_n > 0 ? rare_sum / rare_n : 0;
    report.map_non_rare = non_rare_n > 0 ? non_rare_sum / non_rare_n : 0;
  }
  return report;
}

void print_report(std::ostream& out, const EvalReport& report) {
  out << fmt::format("{:<4} {:<18} {:<10} {:>8} {:>6} {:>7}\n", "slot", "action",
                     "role", "AP", "GT", "preds");
  for (const auto& slot : report.slots) {
    out << fmt::format("{:<4} {:<18} {:<10} {:>8.4f} {:>6} {:>7}{}\n", slot.slot_id,
                       slot.action, slot.role, slot.ap, slot.gt_count,
                       slot.prediction_count,
                       slot.gt_count == 0 ? "  (no GT, excluded)" : "");
  }
  out << fmt::format("mAP_role = {:.4f} over {} slots\n", report.map_role,
                     report.slots_with_gt);
  if (report.map_full)
    out << fmt::format("full = {:.4f}  rare = {:.4f}  non-rare = {:.4f}\n",
                       *report.map_full, *report.map_rare, *report.map_non_rare);
}

void save_report(const std::string& path, const EvalReport& report) {
  json j;
  j["map_role"] = report.map_role;
  j["slots_with_gt"] = report.slots_with_gt;
  if (report.map_full) {
    j["map_full"] = *report.map_full;
    j["map_rare"] = *report.map_rare;
    j["map_non_rare"] = *report.map_non_rare;
  }
  j["slots"] = json::array();
  for (const auto& slot : report.slots) {
    json js;
    js["slot_id"] = slot.slot_id;
    js["action"] = slot.action;
    js["role"] = slot.role;
    js["ap"] = slot.ap;
    js["gt_count"] = slot.gt_count;
    js["prediction_count"] = slot.prediction_count;
    j["slots"].push_back(std::move(js));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace ihoi
