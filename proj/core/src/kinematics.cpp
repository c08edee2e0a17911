#include "artic/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace artic::kin {

JointType joint_type_from_string(std::string_view s) {
  if (s == "revolute") return JointType::kRevolute;
  if (s == "prismatic") return JointType::kPrismatic;
  if (s == "fixed") return JointType::kFixed;
  fail(errc::unknown_joint_type, "joint type '" + std::string(s) + "'");
}

std::string_view to_string(JointType type) {
  switch (type) {
    case JointType::kRevolute: return "revolute";
    case JointType::kPrismatic: return "prismatic";
    case JointType::kFixed: return "fixed";
  }
  return "?";
}

bool Pose::finite() const {
  return xyz.allFinite() && rpy.allFinite();
}

Eigen::Matrix3d Pose::rotation() const {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Isometry3d Pose::transform() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = rotation();
  t.translation() = xyz;
  return t;
}

JointSpec::JointSpec(std::string name, JointType type, std::string parent,
                     std::string child, Pose origin,
                     std::optional<Eigen::Vector3d> axis,
                     std::optional<JointLimit> limit)
    : name_(std::move(name)),
      type_(type),
      parent_(std::move(parent)),
      child_(std::move(child)),
      origin_(origin),
      axis_(std::move(axis)),
      limit_(limit) {
  if (parent_ == child_) {
    fail(errc::cycle_detected,
         "joint '" + name_ + "' connects link '" + parent_ + "' to itself");
  }
  if (!origin_.finite()) {
    fail(errc::bad_pose, "joint '" + name_ + "' origin is not finite");
  }
  if (movable()) {
    if (!axis_) {
      fail(errc::bad_axis, "joint '" + name_ + "' (" +
                               std::string(to_string(type_)) +
                               ") requires an axis");
    }
    if (!axis_->allFinite()) {
      fail(errc::bad_axis, "joint '" + name_ + "' axis is not finite");
    }
    const double norm = axis_->norm();
    if (norm < 1e-12) {
      fail(errc::bad_axis, "joint '" + name_ + "' axis is the zero vector");
    }
    // Idempotent: renormalizing a unit vector must not move its bits, or
    // sign flips stop being exact.
    if (std::abs(norm - 1.0) > 1e-12) *axis_ /= norm;
    if (!limit_) {
      fail(errc::bad_limit, "joint '" + name_ + "' (" +
                                std::string(to_string(type_)) +
                                ") requires a limit");
    }
    if (!std::isfinite(limit_->lower) || !std::isfinite(limit_->upper)) {
      fail(errc::bad_limit, "joint '" + name_ + "' limit is not finite");
    }
    if (limit_->lower > limit_->upper) {
      fail(errc::bad_limit,
           "joint '" + name_ + "' limit lower " +
               std::to_string(limit_->lower) + " exceeds upper " +
               std::to_string(limit_->upper));
    }
  } else {
    if (axis_) {
      fail(errc::bad_axis, "fixed joint '" + name_ + "' must not have an axis");
    }
    if (limit_) {
      fail(errc::bad_limit,
           "fixed joint '" + name_ + "' must not have a limit");
    }
  }
}

LinkSpec::LinkSpec(std::string name, std::optional<std::string> mesh)
    : name_(std::move(name)), mesh_(std::move(mesh)) {
  if (name_.empty()) {
    fail(errc::duplicate_link, "link name must be non-empty");
  }
}

KinematicTree::KinematicTree(std::string robot_name,
                             std::vector<LinkSpec> links,
                             std::vector<JointSpec> joints)
    : robot_name_(std::move(robot_name)),
      links_(std::move(links)),
      joints_(std::move(joints)) {
  if (links_.empty()) {
    fail(errc::disconnected_link, "tree '" + robot_name_ + "' has no links");
  }

  link_index_.reserve(links_.size());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    auto [it, inserted] = link_index_.emplace(links_[i].name(), i);
    if (!inserted) {
      fail(errc::duplicate_link, "link '" + links_[i].name() + "'");
    }
  }

  for (std::size_t j = 0; j < joints_.size(); ++j) {
    const JointSpec& joint = joints_[j];
    for (const std::string* end : {&joint.parent(), &joint.child()}) {
      if (!link_index_.count(*end)) {
        fail(errc::unknown_link_reference,
             "joint '" + joint.name() + "' references unknown link '" + *end +
                 "'");
      }
    }
    auto [it, inserted] = parent_joint_index_.emplace(joint.child(), j);
    if (!inserted) {
      fail(errc::multiple_parents,
           "link '" + joint.child() + "' is the child of joints '" +
               joints_[it->second].name() + "' and '" + joint.name() + "'");
    }
  }

  // Base candidates: links that are no joint's child.
  std::vector<const LinkSpec*> bases;
  for (const LinkSpec& link : links_) {
    if (!parent_joint_index_.count(link.name())) bases.push_back(&link);
  }

  if (bases.empty()) {
    // Every link has a parent, so following parents from any link must loop.
    std::vector<std::string> path;
    std::unordered_map<std::string, int> seen;
    std::string cur = links_.front().name();
    while (!seen.count(cur)) {
      seen.emplace(cur, static_cast<int>(path.size()));
      path.push_back(cur);
      cur = joints_[parent_joint_index_.at(cur)].parent();
    }
    std::string cycle;
    for (std::size_t i = seen.at(cur); i < path.size(); ++i) {
      cycle += path[i];
      cycle += " -> ";
    }
    cycle += cur;
    fail(errc::cycle_detected, cycle);
  }

  if (bases.size() > 1) {
    // Prefer the more specific diagnosis for isolated links.
    for (const LinkSpec* base : bases) {
      bool touched = false;
      for (const JointSpec& joint : joints_) {
        if (joint.parent() == base->name()) {
          touched = true;
          break;
        }
      }
      if (!touched) {
        fail(errc::disconnected_link, "link '" + base->name() +
                                          "' is attached to no joint");
      }
    }
    std::string names;
    for (const LinkSpec* base : bases) {
      if (!names.empty()) names += ", ";
      names += base->name();
    }
    fail(errc::multiple_base_links, names);
  }

  // Exactly one base and in-degree one elsewhere: any unreachable link sits
  // on a cycle among the remaining links.
  std::vector<std::string> stack{bases.front()->name()};
  std::unordered_map<std::string, bool> reached;
  while (!stack.empty()) {
    std::string cur = std::move(stack.back());
    stack.pop_back();
    if (reached[cur]) continue;
    reached[cur] = true;
    for (const JointSpec& joint : joints_) {
      if (joint.parent() == cur && !reached[joint.child()]) {
        stack.push_back(joint.child());
      }
    }
  }
  for (const LinkSpec& link : links_) {
    if (!reached[link.name()]) {
      std::vector<std::string> path;
      std::unordered_map<std::string, int> seen;
      std::string cur = link.name();
      while (!seen.count(cur)) {
        seen.emplace(cur, static_cast<int>(path.size()));
        path.push_back(cur);
        cur = joints_[parent_joint_index_.at(cur)].parent();
      }
      std::string cycle;
      for (std::size_t i = seen.at(cur); i < path.size(); ++i) {
        cycle += path[i];
        cycle += " -> ";
      }
      cycle += cur;
      fail(errc::cycle_detected, cycle);
    }
  }
}

bool KinematicTree::has_link(std::string_view name) const {
  return link_index_.count(std::string(name)) > 0;
}

const LinkSpec& KinematicTree::link(std::string_view name) const {
  auto it = link_index_.find(std::string(name));
  if (it == link_index_.end()) {
    fail(errc::unknown_link_reference, "link '" + std::string(name) + "'");
  }
  return links_[it->second];
}

const JointSpec* KinematicTree::parent_joint(std::string_view link_name) const {
  auto it = parent_joint_index_.find(std::string(link_name));
  if (it == parent_joint_index_.end()) return nullptr;
  return &joints_[it->second];
}

std::vector<const JointSpec*> KinematicTree::child_joints(
    std::string_view link_name) const {
  std::vector<const JointSpec*> out;
  for (const JointSpec& joint : joints_) {
    if (joint.parent() == link_name) out.push_back(&joint);
  }
  return out;
}

KinematicTree build_tree(std::string robot_name, std::vector<LinkSpec> links,
                         std::vector<JointSpec> joints) {
  return KinematicTree(std::move(robot_name), std::move(links),
                       std::move(joints));
}

const std::string& base_link(const KinematicTree& tree) {
  for (const LinkSpec& link : tree.links()) {
    if (tree.parent_joint(link.name()) == nullptr) return link.name();
  }
  // Unreachable: construction guarantees exactly one base.
  fail(errc::multiple_base_links, "tree has no base link");
}

std::vector<std::string> topological_order(const KinematicTree& tree) {
  std::vector<std::string> order;
  order.reserve(tree.links().size());
  std::vector<std::string> stack{base_link(tree)};
  while (!stack.empty()) {
    std::string cur = std::move(stack.back());
    stack.pop_back();
    order.push_back(cur);
    auto children = tree.child_joints(cur);
    // Reverse push so the first-declared joint is visited first.
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      stack.push_back((*it)->child());
    }
  }
  return order;
}

std::vector<JointSpec> movable_joints(const KinematicTree& tree) {
  std::vector<JointSpec> out;
  for (const JointSpec& joint : tree.joints()) {
    if (joint.movable()) out.push_back(joint);
  }
  return out;
}

AxisLimits canonicalize_axis(const Eigen::Vector3d& axis,
                             std::optional<JointLimit> limit) {
  bool flip = false;
  for (int i = 0; i < 3; ++i) {
    if (axis[i] != 0.0) {
      flip = axis[i] < 0.0;
      break;
    }
  }
  if (!flip) return {axis, limit};
  AxisLimits out{-axis, limit};
  if (limit) out.limit = JointLimit{-limit->upper, -limit->lower};
  return out;
}

}  // namespace artic::kin
