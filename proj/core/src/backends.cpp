#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "artic/kinematics.hpp"
#include "artic/llm_client.hpp"
#include "artic/reasoning_chain.hpp"
#include "artic/urdf_io.hpp"
#include "text_util.hpp"

// After the Eigen-bearing headers: glibc's <resolv.h> (reached through
// httplib's socket includes) defines a `_res` macro that collides with
// Eigen parameter names.
#include <httplib.h>

namespace artic::llm {

namespace {

using nlohmann::json;

std::string stem_of(const std::string& file) {
  return std::filesystem::path(file).stem().string();
}

bool contains_any(const std::string& haystack,
                  const std::vector<std::string>& needles) {
  const std::string lower = text::to_lower(haystack);
  for (const std::string& needle : needles) {
    if (lower.find(needle) != std::string::npos) return true;
  }
  return false;
}

const std::vector<std::string>& default_keywords() {
  static const std::vector<std::string> kWords = {
      "cabinet", "drawer", "door",       "lid",   "laptop", "fridge",
      "refrigerator", "oven", "microwave", "chest", "wardrobe",
      "dishwasher",   "bin",  "kettle",    "suitcase", "washer", "trash"};
  return kWords;
}

// Prismatic parts slide along their longest extent; revolute parts hinge
// about z. Plain enough to predict by hand in fixtures, deterministic.
kin::JointType rule_joint_type(const std::string& stem) {
  const std::string lower = text::to_lower(stem);
  for (const char* kw : {"drawer", "tray", "slide"}) {
    if (lower.find(kw) != std::string::npos) return kin::JointType::kPrismatic;
  }
  return kin::JointType::kRevolute;
}

}  // namespace

MockBackend::MockBackend() : keywords_(default_keywords()) {}

MockBackend::MockBackend(const std::filesystem::path& canned_dir)
    : keywords_(default_keywords()) {
  if (!std::filesystem::is_directory(canned_dir)) {
    fail(errc::io_error,
         "canned response directory '" + canned_dir.string() + "' not found");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(canned_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    canned_.emplace(file.stem().string(), buffer.str());
  }
}

void MockBackend::add_canned(const GenerationRequest& request,
                             std::string response) {
  add_canned_hash(request_hash(request), std::move(response));
}

void MockBackend::add_canned_hash(const std::string& hash,
                                  std::string response) {
  std::lock_guard<std::mutex> lock(mutex_);
  canned_[hash] = std::move(response);
}

void MockBackend::set_articulable_keywords(std::vector<std::string> keywords) {
  std::lock_guard<std::mutex> lock(mutex_);
  keywords_ = std::move(keywords);
}

BackendResponse MockBackend::complete(const GenerationRequest& request) {
  const std::string hash = request_hash(request);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = canned_.find(hash);
    if (it != canned_.end()) {
      return BackendResponse{it->second, request.user.size(),
                             it->second.size(), 0.0};
    }
  }
  if (!rules_enabled_) {
    fail(errc::backend_error,
         "mock has no canned response for request hash " + hash);
  }
  std::string text = rule_response(request);
  return BackendResponse{text, request.user.size(), text.size(), 0.0};
}

std::string MockBackend::rule_response(const GenerationRequest& request) const {
  if (request.kind == RequestKind::kSceneIdentification) {
    json arr = json::array();
    for (const SceneObjectBrief& obj : request.scene_objects) {
      if (contains_any(obj.name + " " + obj.description, keywords_)) {
        arr.push_back(
            {{"asset_id", obj.asset_id}, {"reason", "keyword match"}});
      }
    }
    return std::string(chain::kJsonStart) + arr.dump() +
           std::string(chain::kJsonEnd);
  }

  if (request.part_files.empty() ||
      request.part_summaries.size() != request.part_files.size()) {
    fail(errc::backend_error, "mock rule needs part summaries");
  }

  // First part is the base; every other part attaches to it directly.
  const std::string base = stem_of(request.part_files[0]);
  std::vector<kin::LinkSpec> links;
  std::vector<kin::JointSpec> joints;
  links.emplace_back(base, request.part_files[0]);
  json root;
  root["part"] = base;
  root["joint_type"] = "base";
  root["children"] = json::array();

  for (std::size_t i = 1; i < request.part_files.size(); ++i) {
    const std::string child = stem_of(request.part_files[i]);
    const PartSummary& summary = request.part_summaries[i];
    links.emplace_back(child, request.part_files[i]);

    const kin::JointType type = rule_joint_type(child);
    kin::Pose origin;
    origin.xyz = summary.bbox_center;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    kin::JointLimit limit{0.0, 1.5708};
    if (type == kin::JointType::kPrismatic) {
      int major = 0;
      summary.bbox_extent.maxCoeff(&major);
      axis = Eigen::Vector3d::Unit(major);
      limit = kin::JointLimit{0.0, 0.5 * summary.bbox_extent[major]};
    }
    joints.emplace_back("j_" + child, type, base, child, origin, axis, limit);

    root["children"].push_back({{"part", child},
                                {"joint_type", std::string(to_string(type))},
                                {"joint_name", "j_" + child},
                                {"children", json::array()}});
  }

  kin::KinematicTree tree(request.object_name.empty() ? "object"
                                                      : request.object_name,
                          std::move(links), std::move(joints));
  return std::string(chain::kJsonStart) + root.dump() +
         std::string(chain::kJsonEnd) + "\n" + std::string(chain::kUrdfStart) +
         urdf::emit_urdf(tree) + std::string(chain::kUrdfEnd);
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    fail(errc::backend_error, "http backend endpoint is empty");
  }
}

BackendResponse HttpBackend::complete(const GenerationRequest& request) {
  // Split endpoint into base url and path.
  std::string base = config_.endpoint;
  std::string path = "/v1/chat/completions";
  auto scheme = base.find("://");
  if (scheme != std::string::npos) {
    auto slash = base.find('/', scheme + 3);
    if (slash != std::string::npos) {
      path = base.substr(slash);
      base = base.substr(0, slash);
    }
  }

  json body;
  body["model"] = config_.model;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", request.system}},
      json{{"role", "user"}, {"content", request.user}},
  });
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* secret = std::getenv(config_.auth_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + secret);
  }

  httplib::Client client(base);
  client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
  client.set_read_timeout(config_.timeout_ms / 1000,
                          (config_.timeout_ms % 1000) * 1000);

  // Jitter only affects pacing, never output.
  std::mt19937 jitter(0x5eed);
  std::string last_error = "no attempt made";
  std::string retry_after;

  const auto started = std::chrono::steady_clock::now();
  for (int attempt = 0; attempt < std::max(1, config_.max_attempts);
       ++attempt) {
    if (attempt > 0) {
      const int base_ms = config_.base_delay_ms << (attempt - 1);
      const int wait_ms =
          base_ms + static_cast<int>(jitter() % (base_ms / 2 + 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(wait_ms));
    }

    httplib::Result result = client.Post(path, headers, payload,
                                         "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;  // transport failure: retry
    }
    if (result->status == 401 || result->status == 403) {
      fail(errc::unauthorized, "backend rejected credentials (status " +
                                   std::to_string(result->status) + ")");
    }
    if (result->status == 429) {
      retry_after = result->get_header_value("Retry-After");
      last_error = "rate limited";
      continue;
    }
    if (result->status >= 500) {
      last_error = "server status " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      fail(errc::backend_error, "status " + std::to_string(result->status) +
                                    ": " + result->body);
    }

    json reply;
    try {
      reply = json::parse(result->body);
    } catch (const json::parse_error& e) {
      fail(errc::backend_error,
           std::string("unparseable completion body: ") + e.what());
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty()) {
      fail(errc::backend_error, "completion body has no choices");
    }
    const json& message = reply["choices"][0].value("message", json::object());
    BackendResponse response;
    response.text = message.value("content", "");
    const json usage = reply.value("usage", json::object());
    response.input_tokens = usage.value("prompt_tokens", 0u);
    response.output_tokens = usage.value("completion_tokens", 0u);
    response.latency_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started)
            .count();
    return response;
  }

  if (!retry_after.empty() || last_error == "rate limited") {
    fail(errc::rate_limited,
         "rate limited after " + std::to_string(config_.max_attempts) +
             " attempts" +
             (retry_after.empty() ? "" : "; retry-after " + retry_after));
  }
  fail(errc::timeout, "backend unreachable after " +
                          std::to_string(config_.max_attempts) +
                          " attempts: " + last_error);
}

std::unique_ptr<ChatBackend> make_backend(
    const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    fail(errc::io_error,
         "cannot open backend config '" + config_path.string() + "'");
  }
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(errc::schema_error, std::string("backend config: ") + e.what());
  }
  const std::string kind = cfg.value("backend", "");
  if (kind == "mock") {
    std::unique_ptr<MockBackend> mock;
    if (cfg.contains("canned_dir")) {
      std::filesystem::path dir = cfg["canned_dir"].get<std::string>();
      if (dir.is_relative()) dir = config_path.parent_path() / dir;
      mock = std::make_unique<MockBackend>(dir);
    } else {
      mock = std::make_unique<MockBackend>();
    }
    if (cfg.contains("rules_enabled")) {
      mock->set_rules_enabled(cfg["rules_enabled"].get<bool>());
    }
    if (cfg.contains("articulable_keywords")) {
      mock->set_articulable_keywords(
          cfg["articulable_keywords"].get<std::vector<std::string>>());
    }
    return mock;
  }
  if (kind == "http") {
    HttpBackendConfig http;
    if (!cfg.contains("endpoint")) {
      fail(errc::schema_error, "http backend config requires 'endpoint'");
    }
    http.endpoint = cfg["endpoint"].get<std::string>();
    http.model = cfg.value("model", "");
    http.auth_env = cfg.value("auth_env", http.auth_env);
    http.timeout_ms = cfg.value("timeout_ms", http.timeout_ms);
    http.max_attempts = cfg.value("max_attempts", http.max_attempts);
    http.base_delay_ms = cfg.value("base_delay_ms", http.base_delay_ms);
    http.max_in_flight = cfg.value("max_in_flight", http.max_in_flight);
    return std::make_unique<HttpBackend>(http);
  }
  fail(errc::schema_error,
       "backend config 'backend' must be \"mock\" or \"http\", got \"" + kind +
           "\"");
}

}  // namespace artic::llm
