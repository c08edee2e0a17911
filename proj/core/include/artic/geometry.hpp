#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "artic/error.hpp"

namespace artic::geom {

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<std::int32_t, 3>> triangles;

  double triangle_area(std::size_t index) const;
  double surface_area() const;
  bool empty() const { return triangles.empty(); }
};

enum class MeshFormat { kPly, kObj };

/// PLY (ASCII and binary-little-endian) and OBJ (v/f records, normals and
/// materials ignored, quads triangulated fan-wise). Zero-area triangles are
/// dropped at load time.
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path);  // by extension
TriangleMesh parse_ply(const std::string& bytes);
TriangleMesh parse_obj(const std::string& bytes);

/// Axis-aligned bounds.
struct Aabb {
  Eigen::Vector3d min{0, 0, 0};
  Eigen::Vector3d max{0, 0, 0};
  Eigen::Vector3d center() const { return 0.5 * (min + max); }
  Eigen::Vector3d extent() const { return max - min; }
  double diagonal() const { return extent().norm(); }
  void grow(const Eigen::Vector3d& p);
  void grow(const Aabb& other);
};

Aabb bounds_of(const std::vector<Eigen::Vector3d>& points);

enum class Frame { kRaw, kNormalized };

/// Point set for one part (or the whole object). A normalized cloud is
/// centered on its centroid and scaled so the farthest point sits on the
/// unit sphere; (center, scale) invert the mapping exactly:
/// raw = normalized * scale + center.
struct PartCloud {
  std::string part_id;
  std::vector<Eigen::Vector3d> points;
  Frame frame = Frame::kRaw;
  Eigen::Vector3d center{0, 0, 0};
  double scale = 1.0;
};

/// Area-weighted surface samples, uniform within each triangle via the
/// square-root barycentric transform. The generator is mt19937_64 with
/// explicitly constructed doubles, so output is identical across platforms
/// for a given (mesh, count, seed).
PartCloud sample_surface(const TriangleMesh& mesh, std::size_t count,
                         std::uint64_t seed, std::string part_id = {});

PartCloud normalize_part(const PartCloud& cloud);
PartCloud denormalize_part(const PartCloud& cloud);

/// Cloud PLY export, positions only (ASCII, deterministic bytes).
void write_cloud_ply(const PartCloud& cloud, const std::filesystem::path& path);
std::string cloud_to_ply(const PartCloud& cloud);

struct NamedMesh {
  std::string part_id;
  TriangleMesh mesh;
};

/// Global raw-frame samples over the union of all part meshes plus one
/// normalized cloud per part, in input order (the order is the token order
/// seen by the model and must be stable).
struct ObjectCloud {
  std::string object_id;
  PartCloud global;               // Frame::kRaw
  std::vector<PartCloud> parts;   // Frame::kNormalized, input order
};

ObjectCloud build_object_cloud(const std::string& object_id,
                               const std::vector<NamedMesh>& parts,
                               std::size_t global_count,
                               std::size_t part_count, std::uint64_t seed);

struct FeatureVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

/// Interface standing in for the neural point encoder. Implementations
/// declare whether concurrent encode calls are allowed.
class FeatureBackend {
 public:
  virtual ~FeatureBackend() = default;
  virtual std::string_view name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual bool concurrent_ok() const = 0;
  virtual FeatureVector encode(const PartCloud& cloud) const = 0;
};

/// Deterministic 16-dimensional summary: centroid (3), bbox extents (3),
/// max radius (1), per-axis standard deviations (3), point count * 1e-4 (1),
/// zero padding (5). Enough to exercise plumbing and ordering contracts.
class StubBackend final : public FeatureBackend {
 public:
  std::string_view name() const override { return "stub"; }
  std::size_t dim() const override { return 16; }
  bool concurrent_ok() const override { return true; }
  FeatureVector encode(const PartCloud& cloud) const override;
};

FeatureVector encode(const FeatureBackend& backend, const PartCloud& cloud);

}  // namespace artic::geom
