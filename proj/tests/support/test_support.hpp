#pragma once

#include <algorithm>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "artic/kinematics.hpp"
#include "artic/reasoning_chain.hpp"

namespace artic::testsupport {

inline std::filesystem::path fixtures_dir() {
#ifdef ARTIC_TEST_FIXTURES
  return std::filesystem::path(ARTIC_TEST_FIXTURES);
#else
  return std::filesystem::path("tests/fixtures");
#endif
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline Eigen::Vector3d random_axis(std::mt19937_64& rng) {
  while (true) {
    Eigen::Vector3d v{uniform(rng, -1, 1), uniform(rng, -1, 1),
                      uniform(rng, -1, 1)};
    if (v.norm() > 0.1) return v;
  }
}

inline kin::Pose random_pose(std::mt19937_64& rng) {
  kin::Pose pose;
  pose.xyz = {uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
  pose.rpy = {uniform(rng, -std::numbers::pi, std::numbers::pi),
              uniform(rng, -std::numbers::pi, std::numbers::pi),
              uniform(rng, -std::numbers::pi, std::numbers::pi)};
  return pose;
}

inline kin::JointType random_movable_type(std::mt19937_64& rng) {
  return rng() % 2 == 0 ? kin::JointType::kRevolute
                        : kin::JointType::kPrismatic;
}

inline kin::JointLimit random_limit(std::mt19937_64& rng, kin::JointType type) {
  if (type == kin::JointType::kRevolute) {
    const double lower = uniform(rng, -2.0, 0.0);
    // ~5% locked joints (lower == upper) are legal
    const double span = rng() % 20 == 0 ? 0.0 : uniform(rng, 0.0, 3.0);
    return {lower, lower + span};
  }
  const double lower = uniform(rng, -0.5, 0.0);
  const double span = rng() % 20 == 0 ? 0.0 : uniform(rng, 0.0, 1.5);
  return {lower, lower + span};
}

struct TreeGenOptions {
  int min_links = 2;
  int max_links = 12;      // total, virtual helpers included
  bool allow_virtual = true;
  bool allow_fixed = true;
};

/// Random valid tree: real links with mesh references, random topology,
/// random joint parameters, and (optionally) virtual helper chains carrying
/// at most one movable joint each.
inline kin::KinematicTree random_tree(std::mt19937_64& rng,
                                      const TreeGenOptions& options = {}) {
  const int budget =
      options.min_links +
      static_cast<int>(rng() % static_cast<unsigned>(
                                   options.max_links - options.min_links + 1));

  std::vector<kin::LinkSpec> links;
  std::vector<kin::JointSpec> joints;
  std::vector<std::string> real;  // attachable parents

  int link_count = 0;
  int joint_count = 0;
  auto new_real_link = [&]() {
    std::string name = "part" + std::to_string(link_count);
    links.emplace_back(name, name + ".ply");
    ++link_count;
    real.push_back(name);
    return name;
  };
  auto new_virtual_link = [&]() {
    std::string name = "helper" + std::to_string(link_count);
    links.emplace_back(name, std::nullopt);
    ++link_count;
    return name;
  };
  auto add_joint = [&](kin::JointType type, const std::string& parent,
                       const std::string& child) {
    std::optional<Eigen::Vector3d> axis;
    std::optional<kin::JointLimit> limit;
    if (type != kin::JointType::kFixed) {
      axis = random_axis(rng);
      limit = random_limit(rng, type);
    }
    joints.emplace_back("j" + std::to_string(joint_count++), type, parent,
                        child, random_pose(rng), axis, limit);
  };

  new_real_link();  // base
  while (link_count < budget) {
    const std::string parent = real[rng() % real.size()];
    kin::JointType type = options.allow_fixed && rng() % 4 == 0
                              ? kin::JointType::kFixed
                              : random_movable_type(rng);
    const bool through_helper = options.allow_virtual && rng() % 4 == 0 &&
                                link_count + 2 <= budget;
    if (through_helper) {
      const std::string helper = new_virtual_link();
      const std::string child = new_real_link();
      // the movable joint sits on one segment; the other segment is fixed
      if (type == kin::JointType::kFixed || rng() % 2 == 0) {
        add_joint(kin::JointType::kFixed, parent, helper);
        add_joint(type, helper, child);
      } else {
        add_joint(type, parent, helper);
        add_joint(kin::JointType::kFixed, helper, child);
      }
    } else {
      const std::string child = new_real_link();
      add_joint(type, parent, child);
    }
  }

  return kin::KinematicTree("robot" + std::to_string(rng() % 1000),
                            std::move(links), std::move(joints));
}

/// Derives the parameter-free JSON tree from a KinematicTree by contracting
/// virtual helper links, mirroring what a conforming model response states.
/// Compound chains take the first movable type.
inline chain::JsonTreeNode project_json(const kin::KinematicTree& tree) {
  struct Walker {
    const kin::KinematicTree& tree;

    void expand(const std::string& link, chain::JsonTreeNode& node) {
      for (const kin::JointSpec* joint : tree.child_joints(link)) {
        descend(*joint, node, joint->movable() ? joint : nullptr);
      }
    }

    void descend(const kin::JointSpec& joint, chain::JsonTreeNode& parent,
                 const kin::JointSpec* movable) {
      const kin::LinkSpec& child = tree.link(joint.child());
      if (child.is_virtual()) {
        for (const kin::JointSpec* next : tree.child_joints(child.name())) {
          descend(*next, parent,
                  movable ? movable : (next->movable() ? next : nullptr));
        }
        return;
      }
      chain::JsonTreeNode node;
      node.part = child.name();
      node.joint_type =
          movable ? std::string(kin::to_string(movable->type())) : "fixed";
      node.joint_name = movable ? movable->name() : joint.name();
      expand(child.name(), node);
      parent.children.push_back(std::move(node));
    }
  };

  chain::JsonTreeNode root;
  root.part = base_link(tree);
  root.joint_type = "base";
  Walker{tree}.expand(root.part, root);
  return root;
}

/// Exhaustive minimum over all complete assignments of the smaller side —
/// the independence oracle for the Hungarian solver.
inline double brute_force_min_cost(const std::vector<double>& cost, int rows,
                                   int cols) {
  if (rows > cols) {
    std::vector<double> transposed(cost.size());
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        transposed[c * rows + r] = cost[r * cols + c];
      }
    }
    return brute_force_min_cost(transposed, cols, rows);
  }
  std::vector<int> perm(cols);
  for (int c = 0; c < cols; ++c) perm[c] = c;
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int r = 0; r < rows; ++r) total += cost[r * cols + perm[r]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace artic::testsupport
