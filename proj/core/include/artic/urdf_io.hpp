#pragma once

#include <map>
#include <string>

#include "artic/kinematics.hpp"

namespace artic::urdf {

/// Strict mode enforces the constrained URDF subset generated by the model:
/// links are visual/mesh only, joint children are limited to
/// parent/child/origin/axis/limit, and all link elements precede joint
/// elements. Lenient mode ingests full URDF files from external datasets,
/// skipping inertial/collision/dynamics/mimic content and mapping
/// `continuous` joints to Revolute with limits (-pi, pi).
enum class Strictness { kStrict, kLenient };

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct UrdfDocument {
  std::string text;
  kin::KinematicTree tree;
  std::map<std::string, SourceSpan> link_spans;
  std::map<std::string, SourceSpan> joint_spans;
};

UrdfDocument parse_urdf(const std::string& text, Strictness mode);

/// Deterministic emitter: byte-identical output for equal trees. Two-space
/// indentation, links in declaration order then joints in declaration
/// order, origins always explicit, numbers in shortest round-trip form,
/// LF line endings.
std::string emit_urdf(const kin::KinematicTree& tree);

/// Round-trip equality oracle. Same robot name, same link multiset
/// (name, mesh, virtual flag), same joint set keyed by (parent, child) with
/// matching type; origins compared per component, axes and limits compared
/// after joint sign canonicalization.
bool tree_equal(const kin::KinematicTree& a, const kin::KinematicTree& b,
                double tol);

}  // namespace artic::urdf
