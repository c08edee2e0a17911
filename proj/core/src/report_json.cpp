#include "report_json.hpp"

namespace artic::metrics {

namespace {

using nlohmann::json;

json key_json(const JointKey& key) {
  return json{{"parent", key.parent}, {"child", key.child}};
}

json diff_json(const JointDiff& diff) {
  json out;
  out["pred"] = key_json(diff.match.pred);
  out["gt"] = key_json(diff.match.gt);
  out["cost"] = diff.match.cost;
  out["by_name"] = diff.match.by_name;
  out["type_ok"] = diff.type_ok;
  out["origin_dist"] = diff.origin_dist;
  if (diff.axis_angle) out["axis_angle"] = *diff.axis_angle;
  if (diff.angle_limit_err) out["angle_limit_err"] = *diff.angle_limit_err;
  if (diff.dist_limit_err) out["dist_limit_err"] = *diff.dist_limit_err;
  if (diff.range_iou) out["range_iou"] = *diff.range_iou;
  return out;
}

}  // namespace

json report_json(const MetricReport& report) {
  json out;
  out["schema"] = std::string(kDefinitionsVersion);
  out["normalization"] = report.config.normalization_label;
  const bool normalized = report.config.normalization_label == "gt_bbox";
  out["units"] = {
      {"apd", "radians"},
      {"opd", normalized ? "fraction of gt bbox diagonal" : "model length units"},
      {"ald", "radians"},
      {"dld", normalized ? "fraction of gt bbox diagonal" : "model length units"},
  };
  out["weights"] = {{"origin", report.config.weights.origin},
                    {"axis", report.config.weights.axis},
                    {"type", report.config.weights.type},
                    {"cost_cutoff", report.config.weights.cost_cutoff}};
  out["thresholds"] = {{"origin", report.config.thresholds.origin},
                       {"axis_rad", report.config.thresholds.axis_rad},
                       {"range_iou", report.config.thresholds.range_iou}};
  out["tc"] = report.tc;
  if (report.apd) out["apd"] = *report.apd;
  if (report.opd) out["opd"] = *report.opd;
  if (report.ald) out["ald"] = *report.ald;
  if (report.dld) out["dld"] = *report.dld;
  out["gt_joint_count"] = report.gt_joint_count;
  out["usable"] = report.usable;
  out["diffs"] = json::array();
  for (const JointDiff& diff : report.diffs) {
    out["diffs"].push_back(diff_json(diff));
  }
  out["unmatched_pred"] = json::array();
  for (const JointKey& key : report.unmatched_pred) {
    out["unmatched_pred"].push_back(key_json(key));
  }
  out["unmatched_gt"] = json::array();
  for (const JointKey& key : report.unmatched_gt) {
    out["unmatched_gt"].push_back(key_json(key));
  }
  return out;
}

json scene_report_json(const SceneReport& report) {
  json out;
  out["schema"] = std::string(kDefinitionsVersion);
  out["sim_id"] = {{"scene", report.sim_id_scene},
                   {"objects", report.sim_id_objects},
                   {"counts", report.sim_id_counts()}};
  out["sim_us"] = {{"scene", report.sim_us_scene},
                   {"objects", report.sim_us_objects},
                   {"counts", report.sim_us_counts()}};
  out["per_object"] = json::array();
  for (const ObjectOutcome& outcome : report.per_object) {
    json entry;
    entry["object_id"] = outcome.object_id;
    entry["identified_correctly"] = outcome.identified_correctly;
    if (outcome.report) entry["metrics"] = report_json(*outcome.report);
    out["per_object"].push_back(std::move(entry));
  }
  return out;
}

std::string report_to_json(const MetricReport& report) {
  return report_json(report).dump(2);
}

std::string scene_report_to_json(const SceneReport& report) {
  return scene_report_json(report).dump(2);
}

}  // namespace artic::metrics
