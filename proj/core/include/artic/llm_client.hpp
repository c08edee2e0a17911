#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "artic/geometry.hpp"

namespace artic::llm {

// Boundary tokens framing the geometry slots inside the prompt. The global
// slot comes first, then the part slots in the exact order of the provided
// filenames.
inline constexpr std::string_view kGlobalStart = "<g_start>";
inline constexpr std::string_view kGlobalEnd = "<g_end>";
inline constexpr std::string_view kPartStart = "<p_start>";
inline constexpr std::string_view kPartEnd = "<p_end>";

/// Text template with {{name}} placeholders. Rendering with a complete map
/// leaves no unresolved placeholders; missing keys are an error.
struct PromptTemplate {
  std::string name;
  std::string text;
  std::set<std::string> required;

  std::string render(const std::map<std::string, std::string>& values) const;
};

enum class SlotKind { kGlobal, kPart };

struct TokenSlot {
  SlotKind kind = SlotKind::kGlobal;
  int part_index = -1;  // for kPart
  geom::FeatureVector feature;
};

enum class RequestKind { kUrdfGeneration, kSceneIdentification };

struct PartSummary {
  std::string file;
  Eigen::Vector3d bbox_center{0, 0, 0};
  Eigen::Vector3d bbox_extent{0, 0, 0};
};

struct SceneObjectBrief {
  std::string asset_id;
  std::string name;
  std::string description;
};

/// A fully rendered request plus the structured context it was rendered
/// from. The structured fields feed deterministic rule-based mock backends
/// and audit logs; remote backends see only the rendered text.
struct GenerationRequest {
  RequestKind kind = RequestKind::kUrdfGeneration;
  std::string system;
  std::string user;
  std::vector<TokenSlot> slots;  // global first, then parts in order
  int max_output_tokens = 4096;
  double temperature = 0.0;  // evaluation reproducibility

  std::string object_name;
  std::vector<std::string> part_files;
  std::vector<PartSummary> part_summaries;
  std::vector<SceneObjectBrief> scene_objects;
};

struct BackendResponse {
  std::string text;
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
  double latency_ms = 0.0;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string_view name() const = 0;
  virtual int max_in_flight() const { return 1; }
  virtual BackendResponse complete(const GenerationRequest& request) = 0;
};

/// Builds the URDF-generation prompt: object name, part filenames in order,
/// one global slot inside <g_start>/<g_end>, the part slots inside
/// <p_start>/<p_end>, a structure-prior section with per-part bbox centers
/// and extents in the global frame, and the two-block output constraints.
/// part_files must match the cloud's part order (OrderMismatch otherwise).
GenerationRequest build_urdf_prompt(const std::string& object_name,
                                    const std::vector<std::string>& part_files,
                                    const geom::ObjectCloud& cloud,
                                    const geom::FeatureBackend& features);

/// Builds the articulable-object identification prompt from a scene
/// description JSON (asset_id, name, description per object). The response
/// contract is a <json_start>-delimited array of {asset_id, reason}.
GenerationRequest build_scene_id_prompt(const std::string& scene_json);

/// Runs the backend and enforces the response invariant (non-empty text).
BackendResponse complete(ChatBackend& backend,
                         const GenerationRequest& request);

/// Stable hash of a request (FNV-1a over the rendered text), used to key
/// canned mock responses.
std::string request_hash(const GenerationRequest& request);

/// Deterministic offline backend: canned responses keyed by request hash
/// (loadable from a directory of <hash>.txt files), with an optional
/// rule engine fallback that synthesizes well-formed two-block responses
/// from the request's structured context.
class MockBackend final : public ChatBackend {
 public:
  MockBackend();
  explicit MockBackend(const std::filesystem::path& canned_dir);

  std::string_view name() const override { return "mock"; }
  int max_in_flight() const override { return 64; }
  BackendResponse complete(const GenerationRequest& request) override;

  void add_canned(const GenerationRequest& request, std::string response);
  void add_canned_hash(const std::string& hash, std::string response);
  void set_rules_enabled(bool enabled) { rules_enabled_ = enabled; }
  void set_articulable_keywords(std::vector<std::string> keywords);

 private:
  std::string rule_response(const GenerationRequest& request) const;

  std::map<std::string, std::string> canned_;
  bool rules_enabled_ = true;
  std::vector<std::string> keywords_;
  mutable std::mutex mutex_;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://host:port/v1/chat/completions
  std::string model;
  std::string auth_env = "ARTIC_API_KEY";
  int timeout_ms = 30000;
  int max_attempts = 3;     // transport-level retries only
  int base_delay_ms = 1000; // jittered doubling
  int max_in_flight = 4;
};

/// JSON-over-HTTP chat-completion client (OpenAI-style wire format).
/// Feature slots reach the remote model as the compact text summaries
/// already rendered into the prompt; embeddings are not injected.
class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string_view name() const override { return "http"; }
  int max_in_flight() const override { return config_.max_in_flight; }
  BackendResponse complete(const GenerationRequest& request) override;

 private:
  HttpBackendConfig config_;
};

/// Backend factory from a JSON config file:
///   {"backend": "mock" | "http", ...backend fields...}
/// The auth secret is read from the environment variable named in the
/// config, never from the file itself.
std::unique_ptr<ChatBackend> make_backend(
    const std::filesystem::path& config_path);

}  // namespace artic::llm
