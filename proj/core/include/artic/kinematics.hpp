#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "artic/error.hpp"

namespace artic::kin {

/// Joint types of the URDF subset. Anything else is a parse error in strict
/// mode; lenient URDF ingestion maps `continuous` onto Revolute.
enum class JointType { kRevolute, kPrismatic, kFixed };

JointType joint_type_from_string(std::string_view s);
std::string_view to_string(JointType type);

/// Rigid placement: translation plus roll-pitch-yaw (radians).
/// Rotation composes as R = Rz(yaw) * Ry(pitch) * Rx(roll).
struct Pose {
  Eigen::Vector3d xyz{0.0, 0.0, 0.0};
  Eigen::Vector3d rpy{0.0, 0.0, 0.0};

  static Pose zero() { return Pose{}; }

  bool finite() const;
  Eigen::Matrix3d rotation() const;
  Eigen::Isometry3d transform() const;
};

/// Motion range: radians for revolute joints, length units for prismatic.
struct JointLimit {
  double lower = 0.0;
  double upper = 0.0;
};

/// A joint connecting two named links. The constructor validates the
/// invariants: movable joints carry a unit axis (normalized here; zero
/// vectors are rejected rather than defaulted) and a limit with
/// lower <= upper; fixed joints carry neither; parent != child.
class JointSpec {
 public:
  JointSpec(std::string name, JointType type, std::string parent,
            std::string child, Pose origin = Pose::zero(),
            std::optional<Eigen::Vector3d> axis = std::nullopt,
            std::optional<JointLimit> limit = std::nullopt);

  const std::string& name() const { return name_; }
  JointType type() const { return type_; }
  const std::string& parent() const { return parent_; }
  const std::string& child() const { return child_; }
  const Pose& origin() const { return origin_; }
  const std::optional<Eigen::Vector3d>& axis() const { return axis_; }
  const std::optional<JointLimit>& limit() const { return limit_; }
  bool movable() const { return type_ != JointType::kFixed; }

 private:
  std::string name_;
  JointType type_;
  std::string parent_;
  std::string child_;
  Pose origin_;
  std::optional<Eigen::Vector3d> axis_;
  std::optional<JointLimit> limit_;
};

/// A rigid body. Links without a mesh reference are virtual helpers.
class LinkSpec {
 public:
  explicit LinkSpec(std::string name,
                    std::optional<std::string> mesh = std::nullopt);

  const std::string& name() const { return name_; }
  const std::optional<std::string>& mesh() const { return mesh_; }
  bool is_virtual() const { return !mesh_.has_value(); }

 private:
  std::string name_;
  std::optional<std::string> mesh_;
};

/// Validated articulated structure: exactly one base link, every other link
/// the child of exactly one joint, acyclic and connected. Declaration order
/// of links and joints is preserved (it is a serialization invariant).
///
/// Immutable after construction; safe to share across threads.
class KinematicTree {
 public:
  KinematicTree(std::string robot_name, std::vector<LinkSpec> links,
                std::vector<JointSpec> joints);

  const std::string& robot_name() const { return robot_name_; }
  const std::vector<LinkSpec>& links() const { return links_; }
  const std::vector<JointSpec>& joints() const { return joints_; }

  bool has_link(std::string_view name) const;
  const LinkSpec& link(std::string_view name) const;
  /// Joint whose child is `link_name`; nullptr for the base link.
  const JointSpec* parent_joint(std::string_view link_name) const;
  /// Joints whose parent is `link_name`, in declaration order.
  std::vector<const JointSpec*> child_joints(std::string_view link_name) const;

 private:
  std::string robot_name_;
  std::vector<LinkSpec> links_;
  std::vector<JointSpec> joints_;
  std::unordered_map<std::string, std::size_t> link_index_;
  std::unordered_map<std::string, std::size_t> parent_joint_index_;
};

KinematicTree build_tree(std::string robot_name, std::vector<LinkSpec> links,
                         std::vector<JointSpec> joints);

/// The unique link that is no joint's child.
const std::string& base_link(const KinematicTree& tree);

/// Depth-first preorder from the base; children visited in joint
/// declaration order, so the result is stable across runs.
std::vector<std::string> topological_order(const KinematicTree& tree);

/// Non-fixed joints in declaration order.
std::vector<JointSpec> movable_joints(const KinematicTree& tree);

/// A joint about -a with limits (l, u) is physically identical to one about
/// +a with limits (-u, -l). Comparisons and metrics canonicalize both sides
/// first: flip the axis so its first nonzero component is positive and
/// negate-and-swap the limits together with it.
struct AxisLimits {
  Eigen::Vector3d axis;
  std::optional<JointLimit> limit;
};

AxisLimits canonicalize_axis(const Eigen::Vector3d& axis,
                             std::optional<JointLimit> limit);

}  // namespace artic::kin
