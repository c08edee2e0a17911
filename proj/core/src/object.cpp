#include "artic/object.hpp"

namespace artic::kin {

ArticulatedObject::ArticulatedObject(KinematicTree tree,
                                     std::map<std::string, PartGeometry> parts,
                                     Pose root_pose, double scale)
    : tree_(std::move(tree)),
      parts_(std::move(parts)),
      root_pose_(root_pose),
      scale_(scale) {
  for (const LinkSpec& link : tree_.links()) {
    auto it = parts_.find(link.name());
    if (link.is_virtual()) {
      if (it != parts_.end() && it->second.has_geometry()) {
        fail(errc::missing_geometry,
             "virtual link '" + link.name() + "' must not carry geometry");
      }
      continue;
    }
    if (it == parts_.end() || !it->second.has_geometry()) {
      fail(errc::missing_geometry,
           "link '" + link.name() + "' has no geometry reference");
    }
  }
  for (const auto& [name, geometry] : parts_) {
    if (!tree_.has_link(name)) {
      fail(errc::unknown_link_reference,
           "geometry bound to unknown link '" + name + "'");
    }
  }
}

geom::Aabb ArticulatedObject::bounds() const {
  bool any = false;
  geom::Aabb box;
  auto merge = [&box, &any](const geom::Aabb& part_box) {
    if (!any) {
      box = part_box;
      any = true;
    } else {
      box.grow(part_box);
    }
  };
  for (const auto& [name, geometry] : parts_) {
    if (geometry.mesh && !geometry.mesh->vertices.empty()) {
      merge(geom::bounds_of(geometry.mesh->vertices));
    } else if (geometry.cloud && !geometry.cloud->points.empty()) {
      geom::Aabb part_box = geom::bounds_of(geometry.cloud->points);
      if (geometry.cloud->frame == geom::Frame::kNormalized) {
        // Map back into the raw object frame.
        const double s = geometry.cloud->scale;
        const Eigen::Vector3d& c = geometry.cloud->center;
        part_box.min = part_box.min * s + c;
        part_box.max = part_box.max * s + c;
      }
      merge(part_box);
    }
  }
  if (!any) {
    fail(errc::degenerate_bbox,
         "object has no loaded geometry to bound");
  }
  return box;
}

}  // namespace artic::kin
