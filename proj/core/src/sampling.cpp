#include <algorithm>
#include <cmath>
#include <random>

#include "artic/geometry.hpp"

namespace artic::geom {

namespace {

// mt19937_64 output mapped to [0,1) by hand; std::uniform_real_distribution
// is implementation-defined and would break cross-platform golden files.
class UnitRng {
 public:
  explicit UnitRng(std::uint64_t seed) : engine_(seed) {}

  double next() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

PartCloud sample_surface(const TriangleMesh& mesh, std::size_t count,
                         std::uint64_t seed, std::string part_id) {
  if (mesh.empty()) {
    fail(errc::empty_mesh, "cannot sample an empty mesh");
  }
  if (count == 0) {
    fail(errc::empty_cloud, "sample count must be at least 1");
  }

  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    total += mesh.triangle_area(i);
    cumulative[i] = total;
  }
  if (total <= 0.0) {
    fail(errc::empty_mesh, "mesh has zero surface area");
  }

  UnitRng rng(seed);
  PartCloud cloud;
  cloud.part_id = std::move(part_id);
  cloud.frame = Frame::kRaw;
  cloud.points.reserve(count);

  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.next() * total;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    std::size_t tri =
        std::min(static_cast<std::size_t>(it - cumulative.begin()),
                 mesh.triangles.size() - 1);

    const auto& t = mesh.triangles[tri];
    const Eigen::Vector3d& a = mesh.vertices[t[0]];
    const Eigen::Vector3d& b = mesh.vertices[t[1]];
    const Eigen::Vector3d& c = mesh.vertices[t[2]];

    const double r1 = std::sqrt(rng.next());
    const double r2 = rng.next();
    const double u = 1.0 - r1;
    const double v = r1 * (1.0 - r2);
    const double w = r1 * r2;
    cloud.points.push_back(u * a + v * b + w * c);
  }
  return cloud;
}

PartCloud normalize_part(const PartCloud& cloud) {
  if (cloud.frame != Frame::kRaw) {
    fail(errc::format_error,
         "cloud '" + cloud.part_id + "' is already normalized");
  }
  if (cloud.points.empty()) {
    fail(errc::empty_cloud, "cloud '" + cloud.part_id + "' has no points");
  }

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const Eigen::Vector3d& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(cloud.points.size());

  double max_radius = 0.0;
  for (const Eigen::Vector3d& p : cloud.points) {
    max_radius = std::max(max_radius, (p - centroid).norm());
  }
  if (max_radius <= 0.0) max_radius = 1.0;  // single point / coincident points

  PartCloud out;
  out.part_id = cloud.part_id;
  out.frame = Frame::kNormalized;
  out.center = centroid;
  out.scale = max_radius;
  out.points.reserve(cloud.points.size());
  for (const Eigen::Vector3d& p : cloud.points) {
    out.points.push_back((p - centroid) / max_radius);
  }
  return out;
}

PartCloud denormalize_part(const PartCloud& cloud) {
  if (cloud.frame != Frame::kNormalized) {
    fail(errc::format_error, "cloud '" + cloud.part_id + "' is not normalized");
  }
  PartCloud out;
  out.part_id = cloud.part_id;
  out.frame = Frame::kRaw;
  out.points.reserve(cloud.points.size());
  for (const Eigen::Vector3d& p : cloud.points) {
    out.points.push_back(p * cloud.scale + cloud.center);
  }
  return out;
}

ObjectCloud build_object_cloud(const std::string& object_id,
                               const std::vector<NamedMesh>& parts,
                               std::size_t global_count,
                               std::size_t part_count, std::uint64_t seed) {
  if (parts.empty()) {
    fail(errc::empty_mesh, "object '" + object_id + "' has no parts");
  }

  // Union mesh in the object's raw frame, triangle order preserved, so a
  // single-part object samples identically to its part.
  TriangleMesh merged;
  for (const NamedMesh& part : parts) {
    const auto base = static_cast<std::int32_t>(merged.vertices.size());
    merged.vertices.insert(merged.vertices.end(), part.mesh.vertices.begin(),
                           part.mesh.vertices.end());
    for (const auto& t : part.mesh.triangles) {
      merged.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
  }

  ObjectCloud out;
  out.object_id = object_id;
  out.global = sample_surface(merged, global_count, seed, object_id);
  out.parts.reserve(parts.size());
  for (const NamedMesh& part : parts) {
    out.parts.push_back(normalize_part(
        sample_surface(part.mesh, part_count, seed, part.part_id)));
  }
  return out;
}

FeatureVector StubBackend::encode(const PartCloud& cloud) const {
  if (cloud.points.empty()) {
    fail(errc::empty_cloud, "cannot encode an empty cloud");
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const Eigen::Vector3d& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(cloud.points.size());

  Aabb box = bounds_of(cloud.points);

  double max_radius = 0.0;
  Eigen::Vector3d sq = Eigen::Vector3d::Zero();
  for (const Eigen::Vector3d& p : cloud.points) {
    max_radius = std::max(max_radius, (p - centroid).norm());
    sq += (p - centroid).cwiseAbs2();
  }
  const Eigen::Vector3d stddev =
      (sq / static_cast<double>(cloud.points.size())).cwiseSqrt();

  FeatureVector out;
  out.values = {centroid.x(),
                centroid.y(),
                centroid.z(),
                box.extent().x(),
                box.extent().y(),
                box.extent().z(),
                max_radius,
                stddev.x(),
                stddev.y(),
                stddev.z(),
                static_cast<double>(cloud.points.size()) * 1e-4,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0};
  return out;
}

FeatureVector encode(const FeatureBackend& backend, const PartCloud& cloud) {
  FeatureVector out = backend.encode(cloud);
  if (out.dim() != backend.dim()) {
    fail(errc::backend_unavailable,
         std::string(backend.name()) + " returned dimension " +
             std::to_string(out.dim()) + ", declared " +
             std::to_string(backend.dim()));
  }
  for (double v : out.values) {
    if (!std::isfinite(v)) {
      fail(errc::backend_unavailable,
           std::string(backend.name()) + " returned a non-finite feature");
    }
  }
  return out;
}

}  // namespace artic::geom
