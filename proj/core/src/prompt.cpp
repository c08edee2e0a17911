#include <cinttypes>
#include <cstdio>
#include <json.hpp>

#include "artic/llm_client.hpp"
#include "text_util.hpp"

namespace artic::llm {

namespace {

std::string stem_of(const std::string& file) {
  return std::filesystem::path(file).stem().string();
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string short_vector(const Eigen::Vector3d& v) {
  return short_number(v.x()) + " " + short_number(v.y()) + " " +
         short_number(v.z());
}

std::string feature_summary(const geom::FeatureVector& f) {
  std::string out;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (i) out += " ";
    out += short_number(f.values[i]);
  }
  return out;
}

// The model consumed embeddings through these slots during training; a
// hosted backend sees the same geometry as a compact text summary instead,
// so the prompt layout (global first, parts in filename order, named
// boundaries) is preserved at the text level.
std::string slot_marker(const TokenSlot& slot, const std::string& file) {
  if (slot.kind == SlotKind::kGlobal) {
    return "[[slot global | " + feature_summary(slot.feature) + "]]";
  }
  return "[[slot part " + std::to_string(slot.part_index) + " " + file +
         " | " + feature_summary(slot.feature) + "]]";
}

const char* const kUrdfSystemPrompt =
    "You are a domain expert in URDF modeling and mechanical structure "
    "analysis. Infer the parent-child hierarchy, identify the base link, and "
    "determine joint types (revolute, prismatic, fixed) from geometry, "
    "contact, symmetry, and possible motion. Insert virtual helper links "
    "when compound joints are present.";

const char* const kUrdfOutputConstraints =
    "Output constraints:\n"
    "1. First output a JSON kinematic tree delimited by <json_start> and "
    "<json_end>. Each node has fields \"part\", \"joint_type\" and "
    "\"children\" (optional \"joint_name\"); the root uses joint_type "
    "\"base\"; omit all numeric parameters.\n"
    "2. Then output a complete URDF file delimited by <urdf_start> and "
    "<urdf_end>, strictly following URDF syntax for simulator "
    "compatibility. Name each link by its mesh filename and give it a "
    "visual/mesh reference. Each joint defines its type/parent/child and, "
    "for movable joints, the axis/limit with a default zero origin. Omit "
    "inertial and collision terms. Declare all link elements before any "
    "joint elements.";

const char* const kSceneIdSystemPrompt =
    "You are an expert in robot simulation assets. Given a scene "
    "description, decide which objects can be articulated (doors, drawers, "
    "lids and similar moving parts) and report them.";

}  // namespace

std::string PromptTemplate::render(
    const std::map<std::string, std::string>& values) const {
  for (const std::string& key : required) {
    if (!values.count(key)) {
      fail(errc::missing_field,
           "template '" + name + "' placeholder '" + key + "'");
    }
  }
  std::string out = text;
  for (const auto& [key, value] : values) {
    const std::string tag = "{{" + key + "}}";
    std::size_t at = 0;
    while ((at = out.find(tag, at)) != std::string::npos) {
      out.replace(at, tag.size(), value);
      at += value.size();
    }
  }
  std::size_t open = out.find("{{");
  if (open != std::string::npos && out.find("}}", open) != std::string::npos) {
    fail(errc::missing_field, "template '" + name +
                                  "' has unresolved placeholders near byte " +
                                  std::to_string(open));
  }
  return out;
}

GenerationRequest build_urdf_prompt(const std::string& object_name,
                                    const std::vector<std::string>& part_files,
                                    const geom::ObjectCloud& cloud,
                                    const geom::FeatureBackend& features) {
  if (part_files.empty()) {
    fail(errc::order_mismatch, "at least one part file is required");
  }
  if (part_files.size() != cloud.parts.size()) {
    fail(errc::order_mismatch,
         std::to_string(part_files.size()) + " part files vs " +
             std::to_string(cloud.parts.size()) + " part clouds");
  }
  for (std::size_t i = 0; i < part_files.size(); ++i) {
    if (stem_of(part_files[i]) != cloud.parts[i].part_id) {
      fail(errc::order_mismatch,
           "part file '" + part_files[i] + "' at index " + std::to_string(i) +
               " does not match cloud part '" + cloud.parts[i].part_id + "'");
    }
  }

  GenerationRequest request;
  request.kind = RequestKind::kUrdfGeneration;
  request.system = kUrdfSystemPrompt;
  request.object_name = object_name;
  request.part_files = part_files;

  // The global cloud is encoded under its own centering/scale; the inverse
  // is recorded on the cloud so positions remain expressible globally.
  geom::PartCloud global_normalized = geom::normalize_part(cloud.global);
  request.slots.push_back(TokenSlot{
      SlotKind::kGlobal, -1, geom::encode(features, global_normalized)});
  for (std::size_t i = 0; i < cloud.parts.size(); ++i) {
    request.slots.push_back(TokenSlot{SlotKind::kPart, static_cast<int>(i),
                                      geom::encode(features, cloud.parts[i])});
  }

  std::string user;
  user += "Object: " + object_name + "\n";
  user += "Parts (links in order):\n";
  for (std::size_t i = 0; i < part_files.size(); ++i) {
    user += "  " + std::to_string(i) + ": " + part_files[i] + "\n";
  }
  user += "\nGlobal shape context:\n";
  user += std::string(kGlobalStart) + slot_marker(request.slots[0], "") +
          std::string(kGlobalEnd) + "\n";
  user += "\nPart shape contexts (filename order):\n";
  user += std::string(kPartStart);
  for (std::size_t i = 0; i < part_files.size(); ++i) {
    user += slot_marker(request.slots[i + 1], part_files[i]);
  }
  user += std::string(kPartEnd) + "\n";

  user += "\nStructure prior (part bounds in the global frame):\n";
  for (std::size_t i = 0; i < cloud.parts.size(); ++i) {
    const geom::PartCloud raw = geom::denormalize_part(cloud.parts[i]);
    const geom::Aabb box = geom::bounds_of(raw.points);
    PartSummary summary{part_files[i], box.center(), box.extent()};
    user += "- " + part_files[i] + ": center (" +
            short_vector(summary.bbox_center) + "), extents (" +
            short_vector(summary.bbox_extent) + ")\n";
    request.part_summaries.push_back(std::move(summary));
  }

  user += "\n";
  user += kUrdfOutputConstraints;
  request.user = std::move(user);
  return request;
}

GenerationRequest build_scene_id_prompt(const std::string& scene_json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(scene_json);
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::malformed_scene, e.what());
  }
  if (!doc.is_object() || !doc.contains("objects") ||
      !doc["objects"].is_array()) {
    fail(errc::malformed_scene, "scene JSON must carry an 'objects' array");
  }

  GenerationRequest request;
  request.kind = RequestKind::kSceneIdentification;
  request.system = kSceneIdSystemPrompt;

  std::string user;
  user += "Scene objects:\n";
  for (const nlohmann::json& obj : doc["objects"]) {
    if (!obj.is_object() || !obj.contains("asset_id") ||
        !obj["asset_id"].is_string()) {
      fail(errc::malformed_scene, "scene object without an asset_id");
    }
    SceneObjectBrief brief;
    brief.asset_id = obj["asset_id"].get<std::string>();
    if (obj.contains("name") && obj["name"].is_string()) {
      brief.name = obj["name"].get<std::string>();
    }
    if (obj.contains("description") && obj["description"].is_string()) {
      brief.description = obj["description"].get<std::string>();
    }
    user += "- asset_id: " + brief.asset_id + " | name: " + brief.name +
            " | description: " + brief.description + "\n";
    request.scene_objects.push_back(std::move(brief));
  }

  user +=
      "\nList the articulable objects. Output a JSON array delimited by "
      "<json_start> and <json_end>; each entry is an object with fields "
      "\"asset_id\" and \"reason\". Output an empty array if none apply.";
  request.user = std::move(user);
  return request;
}

BackendResponse complete(ChatBackend& backend,
                         const GenerationRequest& request) {
  BackendResponse response = backend.complete(request);
  if (response.text.empty()) {
    fail(errc::backend_error,
         std::string(backend.name()) + " returned an empty response");
  }
  return response;
}

std::string request_hash(const GenerationRequest& request) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  };
  mix(request.kind == RequestKind::kUrdfGeneration ? "urdf" : "scene_id");
  mix(request.system);
  mix(request.user);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace artic::llm
