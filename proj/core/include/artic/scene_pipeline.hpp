#pragma once

#include <filesystem>
#include <optional>
#include <set>

#include "artic/llm_client.hpp"
#include "artic/metrics.hpp"
#include "artic/object.hpp"
#include "artic/reasoning_chain.hpp"

namespace artic::scene {

inline constexpr int kSceneSchemaVersion = 1;

struct SceneObject {
  std::string asset_id;
  std::string name;
  std::string description;
  std::vector<std::string> mesh_paths;  // per part, ordered
  kin::Pose pose;
  double scale = 1.0;
  std::string extra_json;  // unknown fields, preserved opaquely
};

struct SceneDescription {
  std::string scene_id;
  std::vector<SceneObject> objects;
  std::filesystem::path base_dir;  // mesh paths resolve against this
  std::string raw_json;
};

SceneDescription parse_scene(const std::string& json_text);
SceneDescription load_scene(const std::filesystem::path& path);

/// Asks the backend which objects are articulable and parses the delimited
/// JSON array from the response. IDs absent from the scene are dropped with
/// a warning; the empty set is valid.
std::set<std::string> identify_articulable(
    const SceneDescription& scene, llm::ChatBackend& backend,
    std::vector<std::string>* warnings = nullptr);

struct PipelineConfig {
  std::size_t global_samples = 8192;
  std::size_t part_samples = 8192;
  std::uint64_t seed = 0;
  chain::RepairPolicy repair_policy = chain::RepairPolicy::kBounded;
  int max_error_inconsistencies = 0;
  metrics::EvalConfig eval;
  bool copy_meshes = true;
};

enum class ResultStatus { kOk, kIdentifiedNotConverted, kNotArticulable };

std::string_view to_string(ResultStatus status);

struct ArticulationResult {
  std::string asset_id;
  ResultStatus status = ResultStatus::kNotArticulable;
  std::optional<chain::ReasoningChain> chain;
  std::optional<kin::ArticulatedObject> object;
  std::vector<chain::Inconsistency> inconsistencies;
  std::optional<metrics::MetricReport> report;
  std::string error;  // set when status == kIdentifiedNotConverted
  double latency_ms = 0.0;
};

/// Full conversion of one object: load meshes, build the object cloud,
/// prompt, parse/repair the reasoning chain, check consistency, assemble.
/// Failures of any stage land in the result status, never escape it.
ArticulationResult articulate_object(const SceneObject& object,
                                     const std::filesystem::path& base_dir,
                                     llm::ChatBackend& backend,
                                     const geom::FeatureBackend& features,
                                     const PipelineConfig& config);

/// Binds part geometry to the tree. Every non-virtual link needs geometry;
/// virtual helper links need none. Geometry stays in the object's raw
/// frame; root pose and scale record the original scene placement.
kin::ArticulatedObject assemble(
    const std::map<std::string, kin::PartGeometry>& parts,
    const kin::KinematicTree& tree, const kin::Pose& root_pose, double scale);

struct GroundTruth {
  std::set<std::string> articulable;
  std::map<std::string, std::filesystem::path> urdf_paths;
};

/// Layout: <dir>/articulable.json (array of asset ids) + <dir>/<id>.urdf.
GroundTruth load_ground_truth(const std::filesystem::path& dir);

struct SceneManifest {
  std::string scene_id;
  std::vector<ArticulationResult> results;  // sorted by asset_id
  std::filesystem::path urdf_dir;
  std::optional<metrics::SceneReport> report;
  std::vector<std::string> warnings;
  std::string canonical_hash;  // over manifest content minus volatile fields

  std::string to_json() const;
};

/// identify -> articulate each identified object (parallel, bounded by the
/// backend's in-flight limit) -> write URDFs and manifest JSON under
/// out_dir/<scene_id>/. With ground truth, attaches per-object metric
/// reports and the scene Sim-Id / Sim-Us report.
SceneManifest run_scene(const SceneDescription& scene,
                        llm::ChatBackend& backend,
                        const geom::FeatureBackend& features,
                        const std::optional<GroundTruth>& gt,
                        const std::filesystem::path& out_dir,
                        const PipelineConfig& config);

}  // namespace artic::scene
