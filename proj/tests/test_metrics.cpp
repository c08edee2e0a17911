#include <doctest.h>

#include <cmath>
#include <numbers>

#include "artic/metrics.hpp"
#include "artic/urdf_io.hpp"
#include "support/test_support.hpp"

using namespace artic;
using kin::JointLimit;
using kin::JointSpec;
using kin::JointType;
using kin::LinkSpec;
using kin::Pose;

namespace {

Pose at(double x, double y, double z, double roll = 0, double pitch = 0,
        double yaw = 0) {
  Pose pose;
  pose.xyz = {x, y, z};
  pose.rpy = {roll, pitch, yaw};
  return pose;
}

/// Rebuilds the tree with every movable axis negated and limits
/// negated-and-swapped: a physically identical description.
kin::KinematicTree flip_axes(const kin::KinematicTree& tree) {
  std::vector<JointSpec> joints;
  for (const JointSpec& joint : tree.joints()) {
    if (!joint.movable()) {
      joints.push_back(joint);
      continue;
    }
    joints.emplace_back(
        joint.name(), joint.type(), joint.parent(), joint.child(),
        joint.origin(), Eigen::Vector3d(-*joint.axis()),
        JointLimit{-joint.limit()->upper, -joint.limit()->lower});
  }
  return kin::KinematicTree(tree.robot_name(), tree.links(),
                            std::move(joints));
}

/// Supplies every non-virtual link with the same two-corner cloud so that
/// object bounds are exactly [lo, hi].
kin::ArticulatedObject with_box_geometry(const kin::KinematicTree& tree,
                                         const Eigen::Vector3d& lo,
                                         const Eigen::Vector3d& hi) {
  std::map<std::string, kin::PartGeometry> parts;
  for (const LinkSpec& link : tree.links()) {
    if (link.is_virtual()) continue;
    auto cloud = std::make_shared<geom::PartCloud>();
    cloud->part_id = link.name();
    cloud->points = {lo, hi};
    kin::PartGeometry geometry;
    geometry.mesh_path = *link.mesh();
    geometry.cloud = std::move(cloud);
    parts.emplace(link.name(), std::move(geometry));
  }
  return kin::ArticulatedObject(tree, std::move(parts));
}

kin::KinematicTree cabinet(const Eigen::Vector3d& door_axis,
                           JointLimit door_limit = {0.0, 1.5},
                           const Eigen::Vector3d& door_origin = {0.4, 0, 0}) {
  return kin::build_tree(
      "cab",
      {LinkSpec("body", "body.ply"), LinkSpec("door", "door.ply"),
       LinkSpec("drawer", "drawer.ply")},
      {JointSpec("j_door", JointType::kRevolute, "body", "door",
                 Pose{door_origin, {0, 0, 0}}, door_axis, door_limit),
       JointSpec("j_drawer", JointType::kPrismatic, "body", "drawer",
                 at(0, 0.3, 0), Eigen::Vector3d(0, 1, 0),
                 JointLimit{0.0, 0.4})});
}

}  // namespace

TEST_CASE("world_joint_frames composes parent-chain transforms") {
  SUBCASE("all-zero origins stay at the base origin") {
    auto tree = kin::build_tree(
        "chain",
        {LinkSpec("a", "a.ply"), LinkSpec("b", "b.ply"), LinkSpec("c", "c.ply")},
        {JointSpec("j0", JointType::kRevolute, "a", "b", Pose::zero(),
                   Eigen::Vector3d(0, 1, 0), JointLimit{0, 1}),
         JointSpec("j1", JointType::kPrismatic, "b", "c", Pose::zero(),
                   Eigen::Vector3d(1, 0, 0), JointLimit{0, 1})});
    auto frames = metrics::world_joint_frames(tree);
    for (const auto& [key, frame] : frames) {
      CHECK(frame.origin.norm() == 0.0);
    }
    CHECK(*frames.at({"a", "b"}).axis == Eigen::Vector3d(0, 1, 0));
    CHECK(*frames.at({"b", "c"}).axis == Eigen::Vector3d(1, 0, 0));
  }

  SUBCASE("translations compose") {
    auto tree = kin::build_tree(
        "chain",
        {LinkSpec("a", "a.ply"), LinkSpec("b", "b.ply"), LinkSpec("c", "c.ply")},
        {JointSpec("j0", JointType::kFixed, "a", "b", at(0, 1, 0)),
         JointSpec("j1", JointType::kFixed, "b", "c", at(1, 0, 0))});
    auto frames = metrics::world_joint_frames(tree);
    CHECK((frames.at({"b", "c"}).origin - Eigen::Vector3d(1, 1, 0)).norm() ==
          0.0);
  }

  SUBCASE("rotations compose: hand-checked Rz(pi/2)") {
    auto tree = kin::build_tree(
        "chain",
        {LinkSpec("a", "a.ply"), LinkSpec("b", "b.ply"), LinkSpec("c", "c.ply")},
        {JointSpec("j0", JointType::kFixed, "a", "b",
                   at(0, 0, 0, 0, 0, std::numbers::pi / 2)),
         JointSpec("j1", JointType::kFixed, "b", "c", at(1, 0, 0))});
    auto frames = metrics::world_joint_frames(tree);
    CHECK((frames.at({"b", "c"}).origin - Eigen::Vector3d(0, 1, 0)).norm() <
          1e-12);
  }
}

TEST_CASE("match_joints") {
  SUBCASE("identical trees match by name at cost zero") {
    auto tree = cabinet({0, 0, 1});
    auto matches = metrics::match_joints(tree, tree);
    REQUIRE(matches.size() == 2);
    for (const auto& match : matches) {
      CHECK(match.by_name);
      CHECK(match.cost == 0.0);
    }
  }

  SUBCASE("cardinality: 2 pred vs 3 gt leaves one gt unmatched") {
    auto pred = kin::build_tree(
        "p", {LinkSpec("a", "a.ply"), LinkSpec("x", "x.ply"),
              LinkSpec("y", "y.ply")},
        {JointSpec("j0", JointType::kFixed, "a", "x"),
         JointSpec("j1", JointType::kFixed, "a", "y")});
    auto gt = kin::build_tree(
        "g", {LinkSpec("a2", "a.ply"), LinkSpec("u", "u.ply"),
              LinkSpec("v", "v.ply"), LinkSpec("w", "w.ply")},
        {JointSpec("k0", JointType::kFixed, "a2", "u"),
         JointSpec("k1", JointType::kFixed, "a2", "v"),
         JointSpec("k2", JointType::kFixed, "a2", "w")});
    auto matches = metrics::match_joints(pred, gt);
    CHECK(matches.size() == 2);
    auto report = metrics::evaluate(pred, gt);
    CHECK(report.unmatched_gt.size() == 1);
    CHECK(report.unmatched_pred.empty());
  }

  SUBCASE("stage-2 assignment is optimal (brute-force oracle)") {
    std::mt19937_64 rng(31415);
    for (int trial = 0; trial < 60; ++trial) {
      // trees with disjoint link names force everything through stage 2
      testsupport::TreeGenOptions options;
      options.max_links = 7;
      options.allow_virtual = false;
      auto pred = testsupport::random_tree(rng, options);
      auto gt_src = testsupport::random_tree(rng, options);
      std::vector<LinkSpec> renamed;
      for (const LinkSpec& link : gt_src.links()) {
        renamed.emplace_back("gt_" + link.name(), link.mesh());
      }
      std::vector<JointSpec> renamed_joints;
      for (const JointSpec& joint : gt_src.joints()) {
        renamed_joints.emplace_back("gt_" + joint.name(), joint.type(),
                                    "gt_" + joint.parent(),
                                    "gt_" + joint.child(), joint.origin(),
                                    joint.axis(), joint.limit());
      }
      auto gt = kin::build_tree("gt", renamed, renamed_joints);

      metrics::MatchWeights weights;
      weights.cost_cutoff = 1e9;  // keep every pair so totals are comparable
      auto matches = metrics::match_joints(pred, gt, weights);

      auto pf = metrics::world_joint_frames(pred);
      auto gf = metrics::world_joint_frames(gt);
      double total = 0.0;
      for (const auto& match : matches) {
        CHECK_FALSE(match.by_name);
        total += match.cost;
      }

      // brute force over the same cost matrix
      std::vector<metrics::JointKey> pk, gk;
      for (const auto& [key, frame] : pf) pk.push_back(key);
      for (const auto& [key, frame] : gf) gk.push_back(key);
      const int rows = static_cast<int>(pk.size());
      const int cols = static_cast<int>(gk.size());
      std::vector<double> cost(static_cast<std::size_t>(rows) * cols);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          const auto& p = pf.at(pk[r]);
          const auto& g = gf.at(gk[c]);
          double axis_term = std::numbers::pi / 4.0;
          if (p.axis && g.axis) {
            axis_term = std::atan2(p.axis->cross(*g.axis).norm(),
                                   std::abs(p.axis->dot(*g.axis)));
          }
          cost[static_cast<std::size_t>(r) * cols + c] =
              weights.origin * (p.origin - g.origin).norm() +
              weights.axis * axis_term +
              weights.type * (p.type == g.type ? 0.0 : 1.0);
        }
      }
      const double expected = testsupport::brute_force_min_cost(cost, rows, cols);
      CHECK(total == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("pairs beyond the cutoff stay unmatched") {
    auto near = cabinet({0, 0, 1});
    // same structure, far away, different link names
    auto far = kin::build_tree(
        "far", {LinkSpec("b2", "b.ply"), LinkSpec("d2", "d.ply")},
        {JointSpec("j", JointType::kRevolute, "b2", "d2", at(100, 0, 0),
                   Eigen::Vector3d(0, 0, 1), JointLimit{0, 1})});
    metrics::MatchWeights weights;  // cutoff 2.0
    auto matches = metrics::match_joints(near, far, weights);
    CHECK(matches.empty());
  }
}

TEST_CASE("evaluate zero point: identical trees give exact zeros") {
  std::mt19937_64 rng(777);
  for (int i = 0; i < 50; ++i) {
    auto tree = testsupport::random_tree(rng);
    auto report = metrics::evaluate(tree, tree);
    CHECK(report.tc == 1.0);
    CHECK(report.unmatched_gt.empty());
    CHECK(report.unmatched_pred.empty());
    if (report.apd) CHECK(*report.apd == 0.0);
    if (report.opd) CHECK(*report.opd == 0.0);
    if (report.ald) CHECK(*report.ald == 0.0);
    if (report.dld) CHECK(*report.dld == 0.0);
    for (const auto& diff : report.diffs) {
      CHECK(diff.type_ok);
      CHECK(diff.origin_dist == 0.0);
      if (diff.axis_angle) CHECK(*diff.axis_angle == 0.0);
      if (diff.range_iou) CHECK(*diff.range_iou == 1.0);
    }
    CHECK(report.usable);
  }
}

TEST_CASE("perturbation oracles") {
  SUBCASE("constructed axis rotation by delta gives APD = delta") {
    for (double delta : {0.01, 0.05, 0.3}) {
      const Eigen::Vector3d rotated =
          Eigen::AngleAxisd(delta, Eigen::Vector3d::UnitX()) *
          Eigen::Vector3d(0, 0, 1);
      auto gt = cabinet({0, 0, 1});
      auto pred = cabinet(rotated);
      auto report = metrics::evaluate(pred, gt);
      REQUIRE(report.apd.has_value());
      // the cabinet has two movable joints; only the door axis moved
      CHECK(std::abs(*report.apd - delta / 2.0) < 1e-9);
      REQUIRE(report.diffs.size() == 2);
      for (const auto& diff : report.diffs) {
        if (diff.match.pred.child == "door") {
          CHECK(std::abs(*diff.axis_angle - delta) < 1e-9);
        }
      }
      // only the axis moved
      CHECK(*report.opd == 0.0);
      CHECK(*report.ald == 0.0);
      CHECK(*report.dld == 0.0);
      CHECK(report.tc == 1.0);
    }
  }

  SUBCASE("origin offset of d gives OPD = d/diag after normalization") {
    const double d = 0.25;
    auto gt_tree = cabinet({0, 0, 1});
    auto pred_tree = cabinet({0, 0, 1}, {0.0, 1.5},
                             Eigen::Vector3d(0.4, 0, 0) +
                                 Eigen::Vector3d(0, d, 0));
    // geometry with diagonal 2
    const Eigen::Vector3d lo(0, 0, 0);
    const Eigen::Vector3d hi = Eigen::Vector3d(1, 1, 0).normalized() * 2.0;
    auto pred_obj = with_box_geometry(pred_tree, lo, hi);
    auto gt_obj = with_box_geometry(gt_tree, lo, hi);
    auto [pred_n, gt_n] = metrics::normalize_pair(pred_obj, gt_obj);
    auto report = metrics::evaluate(pred_n, gt_n);
    REQUIRE(report.opd.has_value());
    // two matched joints, one moved: mean = (d/2 + 0) / 2
    CHECK(std::abs(*report.opd - d / 2.0 / 2.0) < 1e-9);
    CHECK(*report.apd == 0.0);
  }

  SUBCASE("limit shift of eps gives ALD = eps") {
    const double eps = 0.125;
    auto gt = cabinet({0, 0, 1}, {0.0, 1.5});
    auto pred = cabinet({0, 0, 1}, {0.0 + eps, 1.5 + eps});
    auto report = metrics::evaluate(pred, gt);
    REQUIRE(report.ald.has_value());
    CHECK(std::abs(*report.ald - eps) < 1e-9);
    CHECK(*report.dld == 0.0);
  }

  SUBCASE("prismatic limit shift lands in DLD, not ALD") {
    auto gt = cabinet({0, 0, 1});
    auto pred = kin::build_tree(
        "cab",
        {LinkSpec("body", "body.ply"), LinkSpec("door", "door.ply"),
         LinkSpec("drawer", "drawer.ply")},
        {JointSpec("j_door", JointType::kRevolute, "body", "door",
                   Pose{{0.4, 0, 0}, {0, 0, 0}}, Eigen::Vector3d(0, 0, 1),
                   JointLimit{0.0, 1.5}),
         JointSpec("j_drawer", JointType::kPrismatic, "body", "drawer",
                   at(0, 0.3, 0), Eigen::Vector3d(0, 1, 0),
                   JointLimit{0.1, 0.5})});
    auto report = metrics::evaluate(pred, gt);
    REQUIRE(report.dld.has_value());
    CHECK(std::abs(*report.dld - 0.1) < 1e-9);
    CHECK(*report.ald == 0.0);
  }
}

TEST_CASE("axis sign invariance: flipped axes leave the report unchanged") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 50; ++i) {
    auto pred = testsupport::random_tree(rng);
    auto gt = testsupport::random_tree(rng);
    auto base = metrics::evaluate(pred, gt);
    auto flipped = metrics::evaluate(flip_axes(pred), gt);
    // exact equality, bit for bit, via the serialized report
    CHECK(metrics::report_to_json(base) == metrics::report_to_json(flipped));
  }
}

TEST_CASE("monotonicity: growing one origin error strictly raises OPD") {
  auto gt = cabinet({0, 0, 1});
  double previous = -1.0;
  for (double d : {0.05, 0.1, 0.2, 0.4}) {
    auto pred = cabinet({0, 0, 1}, {0.0, 1.5},
                        Eigen::Vector3d(0.4, 0, 0) + Eigen::Vector3d(0, d, 0));
    auto report = metrics::evaluate(pred, gt);
    REQUIRE(report.opd.has_value());
    CHECK(*report.opd > previous);
    previous = *report.opd;
    CHECK(*report.apd == 0.0);
    CHECK(*report.ald == 0.0);
    CHECK(*report.dld == 0.0);
  }
}

TEST_CASE("scale invariance: uniform scaling divides out") {
  auto scale_tree = [](const kin::KinematicTree& tree, double s) {
    std::vector<JointSpec> joints;
    for (const JointSpec& joint : tree.joints()) {
      Pose origin = joint.origin();
      origin.xyz *= s;
      auto limit = joint.limit();
      if (limit && joint.type() == JointType::kPrismatic) {
        limit = JointLimit{limit->lower * s, limit->upper * s};
      }
      joints.emplace_back(joint.name(), joint.type(), joint.parent(),
                          joint.child(), origin, joint.axis(), limit);
    }
    return kin::KinematicTree(tree.robot_name(), tree.links(), joints);
  };

  auto gt_tree = cabinet({0, 0, 1});
  auto pred_tree = cabinet({0, 1e-2, 1}, {0.1, 1.4},
                           Eigen::Vector3d(0.45, 0.02, 0));
  const Eigen::Vector3d lo(0, 0, 0), hi(1, 1, 1);

  auto report_at = [&](double s) {
    auto pred = with_box_geometry(scale_tree(pred_tree, s), lo * s, hi * s);
    auto gt = with_box_geometry(scale_tree(gt_tree, s), lo * s, hi * s);
    auto [pn, gn] = metrics::normalize_pair(pred, gt);
    return metrics::evaluate(pn, gn);
  };

  auto base = report_at(1.0);
  // powers of two scale exactly
  CHECK(metrics::report_to_json(report_at(4.0)) ==
        metrics::report_to_json(base));
  // arbitrary scales within floating-point slack
  auto odd = report_at(3.7);
  CHECK(*odd.opd == doctest::Approx(*base.opd).epsilon(1e-12));
  CHECK(*odd.apd == doctest::Approx(*base.apd).epsilon(1e-12));
  CHECK(*odd.dld == doctest::Approx(*base.dld).epsilon(1e-12));
}

TEST_CASE("usability") {
  auto gt = cabinet({0, 0, 1});

  SUBCASE("perfect prediction is usable") {
    auto report = metrics::evaluate(gt, gt);
    CHECK(report.usable);
  }

  SUBCASE("axis off 20 degrees fails, 10 degrees passes (theta_a = 15)") {
    auto off20 = cabinet(Eigen::AngleAxisd(20.0 * std::numbers::pi / 180.0,
                                           Eigen::Vector3d::UnitX()) *
                         Eigen::Vector3d(0, 0, 1));
    auto off10 = cabinet(Eigen::AngleAxisd(10.0 * std::numbers::pi / 180.0,
                                           Eigen::Vector3d::UnitX()) *
                         Eigen::Vector3d(0, 0, 1));
    CHECK_FALSE(metrics::evaluate(off20, gt).usable);
    CHECK(metrics::evaluate(off10, gt).usable);
  }

  SUBCASE("an unmatched gt joint forces unusable regardless of thresholds") {
    auto partial = kin::build_tree(
        "cab", {LinkSpec("body", "body.ply"), LinkSpec("door", "door.ply")},
        {JointSpec("j_door", JointType::kRevolute, "body", "door",
                   Pose{{0.4, 0, 0}, {0, 0, 0}}, Eigen::Vector3d(0, 0, 1),
                   JointLimit{0.0, 1.5})});
    auto report = metrics::evaluate(partial, gt);
    CHECK_FALSE(report.usable);
    metrics::UsabilityThresholds loose;
    loose.origin = 1e9;
    loose.axis_rad = 1e9;
    loose.range_iou = 0.0;
    CHECK_FALSE(metrics::usability(report, loose));
  }

  SUBCASE("type mismatch fails the joint") {
    auto wrong_type = kin::build_tree(
        "cab",
        {LinkSpec("body", "body.ply"), LinkSpec("door", "door.ply"),
         LinkSpec("drawer", "drawer.ply")},
        {JointSpec("j_door", JointType::kPrismatic, "body", "door",
                   Pose{{0.4, 0, 0}, {0, 0, 0}}, Eigen::Vector3d(0, 0, 1),
                   JointLimit{0.0, 1.5}),
         JointSpec("j_drawer", JointType::kPrismatic, "body", "drawer",
                   at(0, 0.3, 0), Eigen::Vector3d(0, 1, 0),
                   JointLimit{0.0, 0.4})});
    CHECK_FALSE(metrics::evaluate(wrong_type, gt).usable);
  }

  SUBCASE("range IoU below threshold fails") {
    // [0, 1.5] vs [1.2, 1.5]: IoU = 0.3/1.5 = 0.2 < 0.5
    auto narrow = cabinet({0, 0, 1}, {1.2, 1.5});
    CHECK_FALSE(metrics::evaluate(narrow, gt).usable);
    // [0, 1.5] vs [0.3, 1.5]: IoU = 1.2/1.5 = 0.8 >= 0.5
    auto near = cabinet({0, 0, 1}, {0.3, 1.5});
    CHECK(metrics::evaluate(near, gt).usable);
  }
}

TEST_CASE("normalize_pair and normalize_tree") {
  SUBCASE("linearity: diag 2 turns offset 0.2 into 0.1") {
    auto tree = cabinet({0, 0, 1}, {0, 1.5}, {0.2, 0, 0});
    auto normalized = metrics::normalize_tree(tree, Eigen::Vector3d::Zero(), 2.0);
    CHECK(normalized.joints()[0].origin().xyz.x() == 0.1);
    // prismatic limits rescale, revolute limits do not
    CHECK(normalized.joints()[1].limit()->upper == 0.2);
    CHECK(normalized.joints()[0].limit()->upper == 1.5);
  }

  SUBCASE("identical objects normalize identically") {
    auto tree = cabinet({0, 0, 1});
    auto pred = with_box_geometry(tree, {0, 0, 0}, {1, 1, 1});
    auto gt = with_box_geometry(tree, {0, 0, 0}, {1, 1, 1});
    auto [pn, gn] = metrics::normalize_pair(pred, gt);
    CHECK(urdf::tree_equal(pn, gn, 0.0));
  }

  SUBCASE("zero-extent gt geometry is a DegenerateBBox") {
    auto tree = cabinet({0, 0, 1});
    auto pred = with_box_geometry(tree, {0, 0, 0}, {1, 1, 1});
    auto degenerate = with_box_geometry(tree, {2, 2, 2}, {2, 2, 2});
    CHECK_THROWS_AS(metrics::normalize_pair(pred, degenerate), Error);
  }

  SUBCASE("world positions shift by -center/diag for deep joints too") {
    auto tree = kin::build_tree(
        "deep",
        {LinkSpec("a", "a.ply"), LinkSpec("b", "b.ply"), LinkSpec("c", "c.ply")},
        {JointSpec("j0", JointType::kFixed, "a", "b", at(1, 0, 0)),
         JointSpec("j1", JointType::kFixed, "b", "c", at(0, 1, 0))});
    const Eigen::Vector3d center(0.5, 0.5, 0);
    const double diag = 2.0;
    auto normalized = metrics::normalize_tree(tree, center, diag);
    auto frames = metrics::world_joint_frames(normalized);
    // expected: (world - center) / diag
    CHECK((frames.at({"a", "b"}).origin -
           Eigen::Vector3d((1 - 0.5) / 2, (0 - 0.5) / 2, 0))
              .norm() < 1e-12);
    CHECK((frames.at({"b", "c"}).origin -
           Eigen::Vector3d((1 - 0.5) / 2, (1 - 0.5) / 2, 0))
              .norm() < 1e-12);
  }
}

TEST_CASE("scene_report") {
  using metrics::MetricReport;
  auto usable_report = [] {
    MetricReport r;
    r.usable = true;
    return r;
  }();
  auto broken_report = [] {
    MetricReport r;
    r.usable = false;
    return r;
  }();

  SUBCASE("all identified and usable") {
    std::set<std::string> ids{"a", "b", "c"};
    std::map<std::string, MetricReport> reports{
        {"a", usable_report}, {"b", usable_report}, {"c", usable_report}};
    auto scene = metrics::scene_report(ids, ids, reports);
    CHECK(scene.sim_id_scene);
    CHECK(scene.sim_us_scene);
    CHECK(scene.sim_id_counts() == "3/3(100%)");
    CHECK(scene.sim_us_counts() == "3/3(100%)");
  }

  SUBCASE("a missed object breaks Sim-Id but not Sim-Us") {
    std::set<std::string> gt{"a", "b", "c"};
    std::set<std::string> identified{"a", "b"};
    std::map<std::string, MetricReport> reports{{"a", usable_report},
                                                {"b", usable_report}};
    auto scene = metrics::scene_report(identified, gt, reports);
    CHECK_FALSE(scene.sim_id_scene);
    CHECK(scene.sim_us_scene);  // all usable among identified ∩ gt
    CHECK(scene.sim_id_counts() == "2/3(67%)");
    REQUIRE(scene.per_object.size() == 3);
    CHECK_FALSE(scene.per_object[2].identified_correctly);  // "c"
  }

  SUBCASE("false positive breaks Sim-Id") {
    std::set<std::string> gt{"a"};
    std::set<std::string> identified{"a", "rock"};
    std::map<std::string, MetricReport> reports{{"a", usable_report}};
    auto scene = metrics::scene_report(identified, gt, reports);
    CHECK_FALSE(scene.sim_id_scene);
    CHECK(scene.sim_id_counts() == "1/1(100%)");
  }

  SUBCASE("unusable object breaks Sim-Us") {
    std::set<std::string> ids{"a", "b"};
    std::map<std::string, MetricReport> reports{{"a", usable_report},
                                                {"b", broken_report}};
    auto scene = metrics::scene_report(ids, ids, reports);
    CHECK(scene.sim_id_scene);
    CHECK_FALSE(scene.sim_us_scene);
    CHECK(scene.sim_us_counts() == "1/2(50%)");
  }
}

TEST_CASE("evaluate_batch orders by object id and matches serial results") {
  std::mt19937_64 rng(55);
  std::vector<kin::KinematicTree> trees;
  for (int i = 0; i < 6; ++i) trees.push_back(testsupport::random_tree(rng));

  std::vector<metrics::BatchItem> items;
  items.push_back({"zeta", &trees[0], &trees[1]});
  items.push_back({"alpha", &trees[2], &trees[3]});
  items.push_back({"mid", &trees[4], &trees[5]});

  auto batch = metrics::evaluate_batch(items, {}, 4);
  REQUIRE(batch.size() == 3);
  CHECK(batch[0].first == "alpha");
  CHECK(batch[1].first == "mid");
  CHECK(batch[2].first == "zeta");
  CHECK(metrics::report_to_json(batch[0].second) ==
        metrics::report_to_json(metrics::evaluate(trees[2], trees[3])));
}

TEST_CASE("report serialization states schema and units") {
  auto report = metrics::evaluate(cabinet({0, 0, 1}), cabinet({0, 0, 1}));
  const std::string text = metrics::report_to_json(report);
  CHECK(text.find("artic-metrics-v1") != std::string::npos);
  CHECK(text.find("radians") != std::string::npos);
  CHECK(text.find("fraction of gt bbox diagonal") != std::string::npos);
  CHECK(text.find("\"tc\": 1.0") != std::string::npos);
}
