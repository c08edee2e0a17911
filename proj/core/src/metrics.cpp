#include "artic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <thread>

#include "artic/assignment.hpp"

namespace artic::metrics {

namespace {

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  // atan2 of |cross| and |dot|: exact zero for bitwise-equal axes and full
  // precision near zero, folded into [0, pi/2] by the absolute dot.
  return std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
}

double interval_iou(const kin::JointLimit& a, const kin::JointLimit& b) {
  const double inter =
      std::max(0.0, std::min(a.upper, b.upper) - std::max(a.lower, b.lower));
  const double uni = std::max(a.upper, b.upper) - std::min(a.lower, b.lower);
  if (uni <= 0.0) return 1.0;  // both degenerate at the same point
  return inter / uni;
}

double pair_cost(const WorldJointFrame& p, const WorldJointFrame& g,
                 const MatchWeights& w) {
  constexpr double kFixedAxisPenalty = std::numbers::pi / 4.0;
  double axis_term = kFixedAxisPenalty;
  if (p.axis && g.axis) {
    axis_term = angle_between(*p.axis, *g.axis);
  }
  const double origin_term = (p.origin - g.origin).norm();
  const double type_term = p.type == g.type ? 0.0 : 1.0;
  return w.origin * origin_term + w.axis * axis_term + w.type * type_term;
}

std::string format_counts(std::size_t n, std::size_t d) {
  const long pct =
      d == 0 ? 100 : std::lround(100.0 * static_cast<double>(n) / d);
  return std::to_string(n) + "/" + std::to_string(d) + "(" +
         std::to_string(pct) + "%)";
}

}  // namespace

std::string to_string(const JointKey& key) {
  return key.parent + "->" + key.child;
}

std::map<JointKey, WorldJointFrame> world_joint_frames(
    const kin::KinematicTree& tree) {
  std::map<JointKey, WorldJointFrame> out;
  std::unordered_map<std::string, Eigen::Isometry3d> world;
  world.emplace(base_link(tree), Eigen::Isometry3d::Identity());

  for (const std::string& link : topological_order(tree)) {
    const kin::JointSpec* joint = tree.parent_joint(link);
    if (!joint) continue;  // base
    const Eigen::Isometry3d& parent_world = world.at(joint->parent());
    const Eigen::Isometry3d child_world =
        parent_world * joint->origin().transform();
    world.emplace(link, child_world);

    WorldJointFrame frame;
    frame.name = joint->name();
    frame.type = joint->type();
    frame.origin = child_world.translation();
    if (joint->movable()) {
      const Eigen::Vector3d world_axis = child_world.linear() * (*joint->axis());
      kin::AxisLimits canonical =
          kin::canonicalize_axis(world_axis, joint->limit());
      frame.axis = canonical.axis;
      frame.limit = canonical.limit;
    }
    out.emplace(JointKey{joint->parent(), joint->child()}, std::move(frame));
  }
  return out;
}

std::vector<JointMatch> match_joints(const kin::KinematicTree& pred,
                                     const kin::KinematicTree& gt,
                                     const MatchWeights& weights) {
  const auto pred_frames = world_joint_frames(pred);
  const auto gt_frames = world_joint_frames(gt);

  std::vector<JointMatch> matches;
  std::set<JointKey> used_pred, used_gt;

  // Stage 1: identical child link names. Child names are unique per tree, so
  // this is one-to-one by construction.
  std::map<std::string, JointKey> gt_by_child;
  for (const auto& [key, frame] : gt_frames) gt_by_child.emplace(key.child, key);
  for (const auto& [pkey, pframe] : pred_frames) {
    auto it = gt_by_child.find(pkey.child);
    if (it == gt_by_child.end()) continue;
    const JointKey& gkey = it->second;
    matches.push_back(JointMatch{
        pkey, gkey, pair_cost(pframe, gt_frames.at(gkey), weights), true});
    used_pred.insert(pkey);
    used_gt.insert(gkey);
  }

  // Stage 2: minimum-total-cost assignment over the remainder.
  std::vector<JointKey> rest_pred, rest_gt;
  for (const auto& [key, frame] : pred_frames) {
    if (!used_pred.count(key)) rest_pred.push_back(key);
  }
  for (const auto& [key, frame] : gt_frames) {
    if (!used_gt.count(key)) rest_gt.push_back(key);
  }
  if (rest_pred.empty() || rest_gt.empty()) return matches;

  const int rows = static_cast<int>(rest_pred.size());
  const int cols = static_cast<int>(rest_gt.size());
  std::vector<double> cost(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      cost[static_cast<std::size_t>(r) * cols + c] = pair_cost(
          pred_frames.at(rest_pred[r]), gt_frames.at(rest_gt[c]), weights);
    }
  }
  assignment::Assignment solution = assignment::solve(cost, rows, cols);
  for (int r = 0; r < rows; ++r) {
    const int c = solution.row_to_col[r];
    if (c < 0) continue;
    const double pair = cost[static_cast<std::size_t>(r) * cols + c];
    if (pair > weights.cost_cutoff) continue;
    matches.push_back(JointMatch{rest_pred[r], rest_gt[c], pair, false});
  }
  return matches;
}

MetricReport evaluate(const kin::KinematicTree& pred,
                      const kin::KinematicTree& gt, const EvalConfig& config) {
  const auto pred_frames = world_joint_frames(pred);
  const auto gt_frames = world_joint_frames(gt);
  const std::vector<JointMatch> matches =
      match_joints(pred, gt, config.weights);

  MetricReport report;
  report.config = config;
  report.gt_joint_count = gt_frames.size();

  std::set<JointKey> used_pred, used_gt;
  std::size_t type_hits = 0;
  double origin_sum = 0.0;
  double axis_sum = 0.0;
  std::size_t axis_n = 0;
  double ald_sum = 0.0;
  std::size_t ald_n = 0;
  double dld_sum = 0.0;
  std::size_t dld_n = 0;

  for (const JointMatch& match : matches) {
    const WorldJointFrame& p = pred_frames.at(match.pred);
    const WorldJointFrame& g = gt_frames.at(match.gt);
    used_pred.insert(match.pred);
    used_gt.insert(match.gt);

    JointDiff diff;
    diff.match = match;
    diff.type_ok = p.type == g.type;
    if (diff.type_ok) ++type_hits;
    diff.origin_dist = (p.origin - g.origin).norm();
    origin_sum += diff.origin_dist;

    // Canonical frames can sit on opposite sides of the first-nonzero flip
    // boundary when the axes differ slightly; align the pred joint to the
    // gt joint before comparing limits so physically identical ranges are
    // not mirrored apart.
    std::optional<kin::JointLimit> p_limit = p.limit;
    if (p.axis && g.axis && p_limit && p.axis->dot(*g.axis) < 0.0) {
      p_limit = kin::JointLimit{-p_limit->upper, -p_limit->lower};
    }

    if (p.axis && g.axis) {
      diff.axis_angle = angle_between(*p.axis, *g.axis);
      axis_sum += *diff.axis_angle;
      ++axis_n;
    }
    if (diff.type_ok && p_limit && g.limit) {
      const double err = 0.5 * (std::abs(p_limit->lower - g.limit->lower) +
                                std::abs(p_limit->upper - g.limit->upper));
      if (p.type == kin::JointType::kRevolute) {
        diff.angle_limit_err = err;
        ald_sum += err;
        ++ald_n;
      } else {
        diff.dist_limit_err = err;
        dld_sum += err;
        ++dld_n;
      }
      diff.range_iou = interval_iou(*p_limit, *g.limit);
    }
    report.diffs.push_back(std::move(diff));
  }

  for (const auto& [key, frame] : pred_frames) {
    if (!used_pred.count(key)) report.unmatched_pred.push_back(key);
  }
  for (const auto& [key, frame] : gt_frames) {
    if (!used_gt.count(key)) report.unmatched_gt.push_back(key);
  }

  report.tc = gt_frames.empty()
                  ? 1.0
                  : static_cast<double>(type_hits) /
                        static_cast<double>(gt_frames.size());
  if (!matches.empty()) {
    report.opd = origin_sum / static_cast<double>(matches.size());
  }
  if (axis_n > 0) report.apd = axis_sum / static_cast<double>(axis_n);
  if (ald_n > 0) report.ald = ald_sum / static_cast<double>(ald_n);
  if (dld_n > 0) report.dld = dld_sum / static_cast<double>(dld_n);

  report.usable = usability(report, config.thresholds);
  return report;
}

bool usability(const MetricReport& report,
               const UsabilityThresholds& thresholds) {
  if (!report.unmatched_gt.empty()) return false;
  for (const JointDiff& diff : report.diffs) {
    if (!diff.type_ok) return false;
    if (diff.origin_dist > thresholds.origin) return false;
    if (diff.axis_angle && *diff.axis_angle > thresholds.axis_rad) return false;
    if (diff.range_iou && *diff.range_iou < thresholds.range_iou) return false;
  }
  return true;
}

kin::KinematicTree normalize_tree(const kin::KinematicTree& tree,
                                  const Eigen::Vector3d& center, double diag) {
  if (!(diag > 0.0) || !std::isfinite(diag)) {
    fail(errc::degenerate_bbox,
         "bbox diagonal " + std::to_string(diag) + " cannot normalize");
  }
  const std::string& base = base_link(tree);
  const Eigen::Vector3d shift = center / diag;

  std::vector<kin::JointSpec> joints;
  joints.reserve(tree.joints().size());
  for (const kin::JointSpec& joint : tree.joints()) {
    kin::Pose origin = joint.origin();
    origin.xyz /= diag;
    if (joint.parent() == base) origin.xyz -= shift;
    std::optional<kin::JointLimit> limit = joint.limit();
    if (limit && joint.type() == kin::JointType::kPrismatic) {
      limit = kin::JointLimit{limit->lower / diag, limit->upper / diag};
    }
    joints.emplace_back(joint.name(), joint.type(), joint.parent(),
                        joint.child(), origin, joint.axis(), limit);
  }
  return kin::KinematicTree(tree.robot_name(), tree.links(),
                            std::move(joints));
}

std::pair<kin::KinematicTree, kin::KinematicTree> normalize_pair(
    const kin::ArticulatedObject& pred, const kin::ArticulatedObject& gt) {
  const geom::Aabb box = gt.bounds();
  const double diag = box.diagonal();
  if (!(diag > 0.0)) {
    fail(errc::degenerate_bbox, "gt geometry has zero extent");
  }
  const Eigen::Vector3d center = box.center();
  return {normalize_tree(pred.tree(), center, diag),
          normalize_tree(gt.tree(), center, diag)};
}

std::string SceneReport::sim_id_counts() const {
  return format_counts(identified_correct, gt_articulable);
}

std::string SceneReport::sim_us_counts() const {
  return format_counts(usable, gt_articulable);
}

SceneReport scene_report(
    const std::set<std::string>& identified,
    const std::set<std::string>& gt_articulable,
    const std::map<std::string, MetricReport>& object_reports) {
  SceneReport out;
  out.gt_articulable = gt_articulable.size();

  std::set<std::string> all;
  all.insert(identified.begin(), identified.end());
  all.insert(gt_articulable.begin(), gt_articulable.end());

  bool all_usable = true;
  for (const std::string& id : all) {
    const bool was_identified = identified.count(id) > 0;
    const bool is_articulable = gt_articulable.count(id) > 0;
    ObjectOutcome outcome;
    outcome.object_id = id;
    outcome.identified_correctly = was_identified == is_articulable;
    auto it = object_reports.find(id);
    if (it != object_reports.end()) outcome.report = it->second;
    if (was_identified && is_articulable) {
      ++out.identified_correct;
      const bool ok = outcome.report && outcome.report->usable;
      if (ok) {
        ++out.usable;
      } else {
        all_usable = false;
      }
    }
    out.per_object.push_back(std::move(outcome));
  }

  out.sim_id_objects =
      gt_articulable.empty()
          ? 1.0
          : static_cast<double>(out.identified_correct) /
                static_cast<double>(gt_articulable.size());
  out.sim_us_objects = gt_articulable.empty()
                           ? 1.0
                           : static_cast<double>(out.usable) /
                                 static_cast<double>(gt_articulable.size());
  out.sim_id_scene = identified == gt_articulable;
  out.sim_us_scene = all_usable;
  return out;
}

std::vector<std::pair<std::string, MetricReport>> evaluate_batch(
    std::vector<BatchItem> items, const EvalConfig& config,
    unsigned max_parallel) {
  std::sort(items.begin(), items.end(),
            [](const BatchItem& a, const BatchItem& b) {
              return a.object_id < b.object_id;
            });
  if (max_parallel == 0) {
    max_parallel = std::max(1u, std::thread::hardware_concurrency());
  }

  std::vector<std::pair<std::string, MetricReport>> out(items.size());
  std::size_t next = 0;
  while (next < items.size()) {
    const std::size_t begin = next;
    const std::size_t end =
        std::min(items.size(), begin + static_cast<std::size_t>(max_parallel));
    std::vector<std::future<MetricReport>> futures;
    futures.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      futures.push_back(std::async(std::launch::async, [&items, i, &config] {
        return evaluate(*items[i].pred, *items[i].gt, config);
      }));
    }
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = {items[i].object_id, futures[i - begin].get()};
    }
    next = end;
  }
  return out;
}

}  // namespace artic::metrics
