#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "artic/kinematics.hpp"
#include "artic/object.hpp"

namespace artic::metrics {

inline constexpr std::string_view kDefinitionsVersion = "artic-metrics-v1";

/// Joints are keyed by their (parent link, child link) edge.
struct JointKey {
  std::string parent;
  std::string child;
  auto operator<=>(const JointKey&) const = default;
};

std::string to_string(const JointKey& key);

/// A joint expressed in the base frame at zero displacement: composed
/// parent-chain transform applied to the origin, axis rotated into the base
/// frame and sign-canonicalized together with its limits.
struct WorldJointFrame {
  std::string name;
  kin::JointType type = kin::JointType::kFixed;
  Eigen::Vector3d origin{0, 0, 0};
  std::optional<Eigen::Vector3d> axis;
  std::optional<kin::JointLimit> limit;
};

std::map<JointKey, WorldJointFrame> world_joint_frames(
    const kin::KinematicTree& tree);

struct MatchWeights {
  double origin = 1.0;
  double axis = 1.0;
  double type = 0.5;
  double cost_cutoff = 2.0;
};

struct JointMatch {
  JointKey pred;
  JointKey gt;
  double cost = 0.0;
  bool by_name = false;
};

/// Stage 1 matches joints whose child link names are equal. Stage 2 runs a
/// minimum-total-cost one-to-one assignment over the remainder with
/// cost = w_o * origin_dist + w_a * axis_angle + w_t * [type mismatch]
/// (pi/4 substituted for the axis term when either joint is fixed); pairs
/// costing more than the cutoff stay unmatched. The stage-2 total is
/// minimal over all complete assignments of the smaller side.
std::vector<JointMatch> match_joints(const kin::KinematicTree& pred,
                                     const kin::KinematicTree& gt,
                                     const MatchWeights& weights = {});

struct JointDiff {
  JointMatch match;
  bool type_ok = false;
  double origin_dist = 0.0;
  std::optional<double> axis_angle;       // radians, movable-movable pairs
  std::optional<double> angle_limit_err;  // revolute-revolute pairs
  std::optional<double> dist_limit_err;   // prismatic-prismatic pairs
  std::optional<double> range_iou;        // same-type movable pairs
};

struct UsabilityThresholds {
  double origin = 0.1;          // fraction of the gt bbox diagonal
  double axis_rad = 0.2618;     // 15 degrees
  double range_iou = 0.5;
};

struct EvalConfig {
  MatchWeights weights;
  UsabilityThresholds thresholds;
  std::string normalization_label = "gt_bbox";
};

struct MetricReport {
  double tc = 1.0;  // 1.0 when the ground truth has no joints
  std::optional<double> apd;
  std::optional<double> opd;
  std::optional<double> ald;
  std::optional<double> dld;
  std::vector<JointDiff> diffs;
  std::vector<JointKey> unmatched_pred;
  std::vector<JointKey> unmatched_gt;
  bool usable = false;
  std::size_t gt_joint_count = 0;
  EvalConfig config;
};

/// TC counts matched same-type joints against all gt joints (unmatched gt
/// joints count against it). APD averages arccos|a_p . a_g| over
/// movable-movable pairs; OPD averages origin distance over all matched
/// pairs; ALD/DLD average (|lower diff| + |upper diff|)/2 over
/// revolute-revolute / prismatic-prismatic pairs after canonicalization.
/// Empty domains yield absent values, never zero. Inputs are expected in a
/// common frame (see normalize_pair).
MetricReport evaluate(const kin::KinematicTree& pred,
                      const kin::KinematicTree& gt,
                      const EvalConfig& config = {});

/// Whole-object gate: every gt joint matched, and every matched joint
/// within the origin, axis and range-IoU thresholds (fixed-fixed pairs skip
/// the axis and range checks; a type mismatch fails the joint).
bool usability(const MetricReport& report,
               const UsabilityThresholds& thresholds);

/// Rescales both trees into the gt frame: length quantities divided by the
/// gt bbox diagonal, world positions shifted so the gt bbox center is the
/// origin. Scale errors in pred are penalized, not hidden.
std::pair<kin::KinematicTree, kin::KinematicTree> normalize_pair(
    const kin::ArticulatedObject& pred, const kin::ArticulatedObject& gt);

/// Tree-level form when the gt bounds are already known.
kin::KinematicTree normalize_tree(const kin::KinematicTree& tree,
                                  const Eigen::Vector3d& center, double diag);

struct ObjectOutcome {
  std::string object_id;
  bool identified_correctly = false;
  std::optional<MetricReport> report;
};

struct SceneReport {
  std::vector<ObjectOutcome> per_object;  // sorted by object id
  std::size_t gt_articulable = 0;
  std::size_t identified_correct = 0;  // |identified ∩ gt|
  std::size_t usable = 0;
  double sim_id_objects = 1.0;
  double sim_us_objects = 1.0;
  bool sim_id_scene = false;
  bool sim_us_scene = false;

  std::string sim_id_counts() const;  // "19/25(76%)" style
  std::string sim_us_counts() const;
};

SceneReport scene_report(
    const std::set<std::string>& identified,
    const std::set<std::string>& gt_articulable,
    const std::map<std::string, MetricReport>& object_reports);

/// JSON serialization (schema "artic-metrics-v1", units stated explicitly).
std::string report_to_json(const MetricReport& report);
std::string scene_report_to_json(const SceneReport& report);

struct BatchItem {
  std::string object_id;
  const kin::KinematicTree* pred = nullptr;
  const kin::KinematicTree* gt = nullptr;
};

/// Parallel per-object evaluation with deterministic aggregation order
/// (sorted by object id).
std::vector<std::pair<std::string, MetricReport>> evaluate_batch(
    std::vector<BatchItem> items, const EvalConfig& config,
    unsigned max_parallel = 0);

}  // namespace artic::metrics
