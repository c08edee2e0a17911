#include "artic/scene_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <json.hpp>
#include <sstream>

#include "artic/urdf_io.hpp"
#include "report_json.hpp"

namespace artic::scene {

namespace {

using nlohmann::json;

const char* const kKnownObjectFields[] = {"asset_id",   "name", "description",
                                          "mesh_paths", "pose", "scale"};

kin::Pose parse_pose(const json& node, const std::string& asset_id) {
  if (!node.is_object() || !node.contains("xyz") || !node.contains("rpy")) {
    fail(errc::schema_error,
         "pose of object '" + asset_id + "' requires xyz and rpy");
  }
  auto read3 = [&](const json& arr, const char* which) {
    if (!arr.is_array() || arr.size() != 3) {
      fail(errc::schema_error, "pose." + std::string(which) + " of '" +
                                   asset_id + "' must be a 3-array");
    }
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) {
      if (!arr[i].is_number()) {
        fail(errc::schema_error, "pose." + std::string(which) + " of '" +
                                     asset_id + "' must be numeric");
      }
      v[i] = arr[i].get<double>();
    }
    return v;
  };
  kin::Pose pose;
  pose.xyz = read3(node["xyz"], "xyz");
  pose.rpy = read3(node["rpy"], "rpy");
  if (!pose.finite()) {
    fail(errc::schema_error, "pose of '" + asset_id + "' is not finite");
  }
  return pose;
}

std::string stem_of(const std::string& file) {
  return std::filesystem::path(file).stem().string();
}

std::string file_name_of(const std::string& file) {
  return std::filesystem::path(file).filename().string();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

json result_json(const ArticulationResult& result) {
  json out;
  out["asset_id"] = result.asset_id;
  out["status"] = std::string(to_string(result.status));
  if (!result.error.empty()) out["error"] = result.error;
  if (result.status == ResultStatus::kOk) {
    out["urdf_file"] = result.asset_id + ".urdf";
  }
  if (result.chain) {
    out["repairs"] = json::array();
    for (const chain::Repair& repair : result.chain->repairs) {
      out["repairs"].push_back({{"kind", std::string(to_string(repair.kind))},
                                {"block", repair.block}});
    }
  }
  out["inconsistencies"] = json::array();
  for (const chain::Inconsistency& item : result.inconsistencies) {
    out["inconsistencies"].push_back(
        {{"kind", std::string(to_string(item.kind))},
         {"severity",
          item.severity == chain::Severity::kError ? "error" : "note"},
         {"part", item.part},
         {"message", item.message}});
  }
  if (result.report) out["metrics"] = metrics::report_json(*result.report);
  return out;
}

json manifest_json(const SceneManifest& manifest, bool include_volatile) {
  json out;
  out["schema_version"] = kSceneSchemaVersion;
  out["scene_id"] = manifest.scene_id;
  out["results"] = json::array();
  for (const ArticulationResult& result : manifest.results) {
    out["results"].push_back(result_json(result));
  }
  if (manifest.report) {
    out["report"] = metrics::scene_report_json(*manifest.report);
  }
  out["warnings"] = manifest.warnings;
  if (include_volatile) {
    json timings = json::object();
    for (const ArticulationResult& result : manifest.results) {
      timings[result.asset_id] = result.latency_ms;
    }
    out["timings"] = std::move(timings);
    out["canonical_hash"] = manifest.canonical_hash;
  }
  return out;
}

// Ok-result URDF with mesh references rewritten for the output layout.
kin::KinematicTree rewrite_mesh_refs(
    const kin::KinematicTree& tree,
    const std::map<std::string, std::string>& link_to_ref) {
  std::vector<kin::LinkSpec> links;
  links.reserve(tree.links().size());
  for (const kin::LinkSpec& link : tree.links()) {
    if (link.is_virtual()) {
      links.emplace_back(link.name());
    } else {
      auto it = link_to_ref.find(link.name());
      links.emplace_back(link.name(), it != link_to_ref.end()
                                          ? it->second
                                          : *link.mesh());
    }
  }
  return kin::KinematicTree(tree.robot_name(), std::move(links),
                            tree.joints());
}

/// Ground-truth object: lenient-parsed URDF plus whatever referenced
/// geometry can be loaded (resolved against the URDF's directory).
kin::ArticulatedObject load_gt_object(const std::filesystem::path& urdf_path,
                                      std::vector<std::string>* warnings) {
  std::ifstream in(urdf_path, std::ios::binary);
  if (!in) {
    fail(errc::io_error, "cannot open gt URDF '" + urdf_path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  urdf::UrdfDocument doc =
      urdf::parse_urdf(buffer.str(), urdf::Strictness::kLenient);

  std::map<std::string, kin::PartGeometry> parts;
  for (const kin::LinkSpec& link : doc.tree.links()) {
    if (link.is_virtual()) continue;
    kin::PartGeometry geometry;
    geometry.mesh_path = *link.mesh();
    std::filesystem::path resolved = *link.mesh();
    if (resolved.is_relative()) resolved = urdf_path.parent_path() / resolved;
    try {
      geometry.mesh = std::make_shared<geom::TriangleMesh>(
          geom::load_mesh(resolved));
    } catch (const Error& e) {
      if (warnings) {
        warnings->push_back("gt mesh '" + resolved.string() +
                            "' not loadable: " + e.what());
      }
    }
    parts.emplace(link.name(), std::move(geometry));
  }
  return kin::ArticulatedObject(doc.tree, std::move(parts));
}

}  // namespace

std::string_view to_string(ResultStatus status) {
  switch (status) {
    case ResultStatus::kOk: return "ok";
    case ResultStatus::kIdentifiedNotConverted: return "identified_not_converted";
    case ResultStatus::kNotArticulable: return "not_articulable";
  }
  return "?";
}

SceneDescription parse_scene(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail_at(errc::schema_error, e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!doc.is_object()) {
    fail(errc::schema_error, "scene description must be a JSON object");
  }
  SceneDescription scene;
  scene.raw_json = json_text;
  if (doc.contains("schema_version") &&
      (!doc["schema_version"].is_number_integer() ||
       doc["schema_version"].get<int>() != kSceneSchemaVersion)) {
    fail(errc::schema_error, "schema_version (this build reads version " +
                                 std::to_string(kSceneSchemaVersion) + ")");
  }
  if (!doc.contains("scene_id") || !doc["scene_id"].is_string()) {
    fail(errc::schema_error, "scene_id");
  }
  scene.scene_id = doc["scene_id"].get<std::string>();
  if (!doc.contains("objects") || !doc["objects"].is_array()) {
    fail(errc::schema_error, "objects");
  }

  std::set<std::string> seen_ids;
  for (const json& node : doc["objects"]) {
    if (!node.is_object()) {
      fail(errc::schema_error, "objects[] entries must be objects");
    }
    SceneObject object;
    if (!node.contains("asset_id") || !node["asset_id"].is_string()) {
      fail(errc::schema_error, "asset_id");
    }
    object.asset_id = node["asset_id"].get<std::string>();
    if (!seen_ids.insert(object.asset_id).second) {
      fail(errc::schema_error,
           "asset_id '" + object.asset_id + "' is duplicated");
    }
    if (!node.contains("name") || !node["name"].is_string()) {
      fail(errc::schema_error, "name (object '" + object.asset_id + "')");
    }
    object.name = node["name"].get<std::string>();
    if (node.contains("description") && node["description"].is_string()) {
      object.description = node["description"].get<std::string>();
    }
    if (!node.contains("mesh_paths") || !node["mesh_paths"].is_array() ||
        node["mesh_paths"].empty()) {
      fail(errc::schema_error,
           "mesh_paths (object '" + object.asset_id + "')");
    }
    for (const json& path : node["mesh_paths"]) {
      if (!path.is_string()) {
        fail(errc::schema_error,
             "mesh_paths entries of '" + object.asset_id + "'");
      }
      object.mesh_paths.push_back(path.get<std::string>());
    }
    if (!node.contains("pose")) {
      fail(errc::schema_error, "pose (object '" + object.asset_id + "')");
    }
    object.pose = parse_pose(node["pose"], object.asset_id);
    if (node.contains("scale")) {
      if (!node["scale"].is_number() || node["scale"].get<double>() <= 0.0) {
        fail(errc::schema_error, "scale (object '" + object.asset_id + "')");
      }
      object.scale = node["scale"].get<double>();
    }

    json extra = json::object();
    for (const auto& [key, value] : node.items()) {
      bool known = false;
      for (const char* field : kKnownObjectFields) {
        if (key == field) {
          known = true;
          break;
        }
      }
      if (!known) extra[key] = value;
    }
    if (!extra.empty()) object.extra_json = extra.dump();

    scene.objects.push_back(std::move(object));
  }
  return scene;
}

SceneDescription load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(errc::io_error, "cannot open scene '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  SceneDescription scene = parse_scene(buffer.str());
  scene.base_dir = path.parent_path();
  return scene;
}

std::set<std::string> identify_articulable(const SceneDescription& scene,
                                           llm::ChatBackend& backend,
                                           std::vector<std::string>* warnings) {
  // Rebuild a minimal scene JSON so programmatic SceneDescriptions work too.
  json doc;
  doc["scene_id"] = scene.scene_id;
  doc["objects"] = json::array();
  for (const SceneObject& object : scene.objects) {
    doc["objects"].push_back({{"asset_id", object.asset_id},
                              {"name", object.name},
                              {"description", object.description}});
  }
  llm::GenerationRequest request = llm::build_scene_id_prompt(doc.dump());
  llm::BackendResponse response = llm::complete(backend, request);

  auto block = chain::extract_json_block(response.text);
  if (!block) {
    fail(errc::response_unparseable,
         "identification response has no <json_start> block");
  }
  json arr;
  try {
    arr = json::parse(*block);
  } catch (const json::parse_error& e) {
    fail(errc::response_unparseable,
         std::string("identification block: ") + e.what());
  }
  if (!arr.is_array()) {
    fail(errc::response_unparseable,
         "identification block must be a JSON array");
  }

  std::set<std::string> scene_ids;
  for (const SceneObject& object : scene.objects) {
    scene_ids.insert(object.asset_id);
  }

  std::set<std::string> out;
  for (const json& entry : arr) {
    std::string id;
    if (entry.is_string()) {
      id = entry.get<std::string>();
    } else if (entry.is_object() && entry.contains("asset_id") &&
               entry["asset_id"].is_string()) {
      id = entry["asset_id"].get<std::string>();
    } else {
      fail(errc::response_unparseable,
           "identification entries must be ids or {asset_id, reason}");
    }
    if (!scene_ids.count(id)) {
      if (warnings) {
        warnings->push_back("identified id '" + id +
                            "' is not in the scene; dropped");
      }
      continue;
    }
    out.insert(id);
  }
  return out;
}

kin::ArticulatedObject assemble(
    const std::map<std::string, kin::PartGeometry>& parts,
    const kin::KinematicTree& tree, const kin::Pose& root_pose, double scale) {
  return kin::ArticulatedObject(tree, parts, root_pose, scale);
}

ArticulationResult articulate_object(const SceneObject& object,
                                     const std::filesystem::path& base_dir,
                                     llm::ChatBackend& backend,
                                     const geom::FeatureBackend& features,
                                     const PipelineConfig& config) {
  ArticulationResult result;
  result.asset_id = object.asset_id;
  const auto started = std::chrono::steady_clock::now();

  try {
    std::vector<geom::NamedMesh> named;
    std::map<std::string, std::shared_ptr<const geom::TriangleMesh>> by_stem;
    for (const std::string& path : object.mesh_paths) {
      std::filesystem::path resolved = path;
      if (resolved.is_relative()) resolved = base_dir / resolved;
      auto mesh =
          std::make_shared<const geom::TriangleMesh>(geom::load_mesh(resolved));
      const std::string stem = stem_of(path);
      if (by_stem.count(stem)) {
        fail(errc::schema_error, "object '" + object.asset_id +
                                     "' has two parts with stem '" + stem +
                                     "'");
      }
      by_stem.emplace(stem, mesh);
      named.push_back(geom::NamedMesh{stem, *mesh});
    }

    geom::ObjectCloud cloud =
        geom::build_object_cloud(object.asset_id, named, config.global_samples,
                                 config.part_samples, config.seed);
    llm::GenerationRequest request = llm::build_urdf_prompt(
        object.name.empty() ? object.asset_id : object.name,
        object.mesh_paths, cloud, features);
    llm::BackendResponse response = llm::complete(backend, request);

    result.chain = chain::repair_chain(response.text, config.repair_policy);
    result.inconsistencies =
        chain::check_consistency(result.chain->json_tree,
                                 result.chain->urdf.tree);
    const int errors = chain::error_count(result.inconsistencies);
    if (errors > config.max_error_inconsistencies) {
      const chain::Inconsistency* first = nullptr;
      for (const chain::Inconsistency& item : result.inconsistencies) {
        if (item.severity == chain::Severity::kError) {
          first = &item;
          break;
        }
      }
      result.status = ResultStatus::kIdentifiedNotConverted;
      result.error = std::string(to_string(first->kind)) + "(" + first->part +
                     "): " + first->message;
      result.latency_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - started)
                              .count();
      return result;
    }

    std::map<std::string, kin::PartGeometry> parts;
    for (std::size_t i = 0; i < object.mesh_paths.size(); ++i) {
      const std::string stem = stem_of(object.mesh_paths[i]);
      if (!result.chain->urdf.tree.has_link(stem)) continue;
      kin::PartGeometry geometry;
      geometry.mesh_path = object.mesh_paths[i];
      geometry.mesh = by_stem.at(stem);
      parts.emplace(stem, std::move(geometry));
    }
    result.object = assemble(parts, result.chain->urdf.tree, object.pose,
                             object.scale);
    result.status = ResultStatus::kOk;
  } catch (const Error& e) {
    result.status = ResultStatus::kIdentifiedNotConverted;
    result.error = e.what();
  } catch (const std::exception& e) {
    result.status = ResultStatus::kIdentifiedNotConverted;
    result.error = e.what();
  }

  result.latency_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  return result;
}

GroundTruth load_ground_truth(const std::filesystem::path& dir) {
  GroundTruth gt;
  const std::filesystem::path list = dir / "articulable.json";
  std::ifstream in(list);
  if (!in) {
    fail(errc::io_error, "cannot open '" + list.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(errc::schema_error, std::string("articulable.json: ") + e.what());
  }
  if (!doc.is_array()) {
    fail(errc::schema_error, "articulable.json must be an array of ids");
  }
  for (const json& id : doc) {
    if (!id.is_string()) {
      fail(errc::schema_error, "articulable.json entries must be strings");
    }
    gt.articulable.insert(id.get<std::string>());
  }
  for (const std::string& id : gt.articulable) {
    const std::filesystem::path urdf = dir / (id + ".urdf");
    if (std::filesystem::exists(urdf)) gt.urdf_paths.emplace(id, urdf);
  }
  return gt;
}

std::string SceneManifest::to_json() const {
  return manifest_json(*this, true).dump(2) + "\n";
}

SceneManifest run_scene(const SceneDescription& scene,
                        llm::ChatBackend& backend,
                        const geom::FeatureBackend& features,
                        const std::optional<GroundTruth>& gt,
                        const std::filesystem::path& out_dir,
                        const PipelineConfig& config) {
  SceneManifest manifest;
  manifest.scene_id = scene.scene_id;
  manifest.urdf_dir = out_dir / scene.scene_id;

  std::error_code ec;
  std::filesystem::create_directories(manifest.urdf_dir, ec);
  if (ec) {
    fail(errc::io_error, "cannot create '" + manifest.urdf_dir.string() +
                             "': " + ec.message());
  }

  std::set<std::string> identified;
  try {
    identified = identify_articulable(scene, backend, &manifest.warnings);
  } catch (const Error& e) {
    // Identification failure degrades to attempting every object; each
    // conversion then records its own backend error.
    manifest.warnings.push_back(std::string("identification failed: ") +
                                e.what() + "; attempting all objects");
    for (const SceneObject& object : scene.objects) {
      identified.insert(object.asset_id);
    }
  }

  std::vector<const SceneObject*> ordered;
  for (const SceneObject& object : scene.objects) ordered.push_back(&object);
  std::sort(ordered.begin(), ordered.end(),
            [](const SceneObject* a, const SceneObject* b) {
              return a->asset_id < b->asset_id;
            });

  // Convert identified objects in bounded waves; one object's failure never
  // aborts the scene.
  const auto in_flight =
      static_cast<std::size_t>(std::max(1, backend.max_in_flight()));
  std::vector<ArticulationResult> results(ordered.size());
  std::size_t next = 0;
  while (next < ordered.size()) {
    const std::size_t begin = next;
    const std::size_t end = std::min(ordered.size(), begin + in_flight);
    std::vector<std::future<ArticulationResult>> futures;
    for (std::size_t i = begin; i < end; ++i) {
      const SceneObject* object = ordered[i];
      if (!identified.count(object->asset_id)) {
        futures.emplace_back();
        continue;
      }
      futures.push_back(std::async(std::launch::async, [&, object] {
        return articulate_object(*object, scene.base_dir, backend, features,
                                 config);
      }));
    }
    for (std::size_t i = begin; i < end; ++i) {
      if (!futures[i - begin].valid()) {
        results[i].asset_id = ordered[i]->asset_id;
        results[i].status = ResultStatus::kNotArticulable;
      } else {
        results[i] = futures[i - begin].get();
      }
    }
    next = end;
  }

  // Write URDFs (mesh files copied next to them) for converted objects.
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    ArticulationResult& result = results[i];
    if (result.status != ResultStatus::kOk) continue;
    const SceneObject& object = *ordered[i];

    std::map<std::string, std::string> link_refs;
    for (const auto& [link, geometry] : result.object->parts()) {
      if (geometry.mesh_path.empty()) continue;
      const std::string file = file_name_of(geometry.mesh_path);
      if (config.copy_meshes) {
        const std::filesystem::path mesh_dir =
            manifest.urdf_dir / "meshes" / object.asset_id;
        std::filesystem::create_directories(mesh_dir, ec);
        std::filesystem::path source = geometry.mesh_path;
        if (source.is_relative()) source = scene.base_dir / source;
        std::filesystem::copy_file(
            source, mesh_dir / file,
            std::filesystem::copy_options::overwrite_existing, ec);
        if (ec) {
          manifest.warnings.push_back("mesh copy failed for '" +
                                      source.string() + "': " + ec.message());
        }
        link_refs[link] = "meshes/" + object.asset_id + "/" + file;
      } else {
        link_refs[link] = geometry.mesh_path;
      }
    }
    const kin::KinematicTree rewritten =
        rewrite_mesh_refs(result.object->tree(), link_refs);
    const std::filesystem::path urdf_path =
        manifest.urdf_dir / (object.asset_id + ".urdf");
    std::ofstream out(urdf_path, std::ios::binary);
    if (!out) {
      fail(errc::io_error, "cannot write '" + urdf_path.string() + "'");
    }
    out << urdf::emit_urdf(rewritten);
  }

  // Metrics against ground truth.
  if (gt) {
    std::map<std::string, metrics::MetricReport> reports;
    for (ArticulationResult& result : results) {
      if (result.status != ResultStatus::kOk) continue;
      auto it = gt->urdf_paths.find(result.asset_id);
      if (it == gt->urdf_paths.end()) continue;
      try {
        kin::ArticulatedObject gt_object =
            load_gt_object(it->second, &manifest.warnings);
        metrics::EvalConfig eval = config.eval;
        kin::KinematicTree pred_tree = result.object->tree();
        kin::KinematicTree gt_tree = gt_object.tree();
        try {
          auto [pn, gn] = metrics::normalize_pair(*result.object, gt_object);
          pred_tree = std::move(pn);
          gt_tree = std::move(gn);
        } catch (const Error& e) {
          eval.normalization_label = "none";
          manifest.warnings.push_back("evaluating '" + result.asset_id +
                                      "' unnormalized: " + e.what());
        }
        result.report = metrics::evaluate(pred_tree, gt_tree, eval);
        reports.emplace(result.asset_id, *result.report);
      } catch (const Error& e) {
        manifest.warnings.push_back("metrics for '" + result.asset_id +
                                    "' failed: " + e.what());
      }
    }
    manifest.report = metrics::scene_report(identified, gt->articulable,
                                            reports);
  }

  manifest.results = std::move(results);

  const std::string canonical = manifest_json(manifest, false).dump();
  char hash_buf[17];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical)));
  manifest.canonical_hash = hash_buf;

  const std::filesystem::path manifest_path =
      manifest.urdf_dir / "manifest.json";
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot write '" + manifest_path.string() + "'");
  }
  out << manifest.to_json();
  return manifest;
}

}  // namespace artic::scene
