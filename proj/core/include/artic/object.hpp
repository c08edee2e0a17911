#pragma once

#include <map>
#include <memory>

#include "artic/geometry.hpp"
#include "artic/kinematics.hpp"

namespace artic::kin {

/// Geometry bound to one link: the mesh reference written into URDF output,
/// and optionally the loaded mesh / sampled cloud for bbox computation.
struct PartGeometry {
  std::string mesh_path;
  std::shared_ptr<const geom::TriangleMesh> mesh;
  std::shared_ptr<const geom::PartCloud> cloud;

  bool has_geometry() const {
    return mesh != nullptr || cloud != nullptr || !mesh_path.empty();
  }
};

/// A kinematic tree bound to part geometry, plus the placement of the whole
/// object in the scene frame. Every non-virtual link carries a geometry
/// reference; virtual helper links carry none.
class ArticulatedObject {
 public:
  ArticulatedObject(KinematicTree tree,
                    std::map<std::string, PartGeometry> parts,
                    Pose root_pose = Pose::zero(), double scale = 1.0);

  const KinematicTree& tree() const { return tree_; }
  const std::map<std::string, PartGeometry>& parts() const { return parts_; }
  const Pose& root_pose() const { return root_pose_; }
  double scale() const { return scale_; }

  /// Bounds over all bound geometry, in the object's raw frame.
  /// Throws DegenerateBBox when no extent can be computed.
  geom::Aabb bounds() const;

 private:
  KinematicTree tree_;
  std::map<std::string, PartGeometry> parts_;
  Pose root_pose_;
  double scale_;
};

}  // namespace artic::kin
