#include <doctest.h>

#include "artic/llm_client.hpp"
#include "artic/reasoning_chain.hpp"
#include "support/test_support.hpp"

// after the Eigen-bearing headers (see backends.cpp)
#include <httplib.h>

#include <fstream>
#include <thread>

using namespace artic;

namespace {

geom::TriangleMesh box_mesh(const Eigen::Vector3d& lo,
                            const Eigen::Vector3d& hi) {
  geom::TriangleMesh mesh;
  const double x0 = lo.x(), y0 = lo.y(), z0 = lo.z();
  const double x1 = hi.x(), y1 = hi.y(), z1 = hi.z();
  mesh.vertices = {{x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0},
                   {x0, y0, z1}, {x1, y0, z1}, {x1, y1, z1}, {x0, y1, z1}};
  mesh.triangles = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7},
                    {0, 1, 5}, {0, 5, 4}, {1, 2, 6}, {1, 6, 5},
                    {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  return mesh;
}

geom::ObjectCloud two_part_cloud() {
  std::vector<geom::NamedMesh> parts;
  parts.push_back({"cab_base", box_mesh({0, 0, 0}, {1, 1, 1})});
  parts.push_back({"cab_door", box_mesh({1, 0, 0}, {1.05, 1, 1})});
  return geom::build_object_cloud("cab", parts, 512, 512, 3);
}

const std::vector<std::string> kTwoFiles = {"parts/cab_base.ply",
                                            "parts/cab_door.ply"};

}  // namespace

TEST_CASE("PromptTemplate rendering") {
  llm::PromptTemplate tmpl{"greet", "Hello {{name}}, you are {{role}}.",
                           {"name", "role"}};
  CHECK(tmpl.render({{"name", "Ada"}, {"role", "an expert"}}) ==
        "Hello Ada, you are an expert.");
  CHECK_THROWS_AS(tmpl.render({{"name", "Ada"}}), Error);
}

TEST_CASE("build_urdf_prompt") {
  geom::StubBackend features;
  auto cloud = two_part_cloud();

  SUBCASE("slot markers: one global, parts in order") {
    auto request = llm::build_urdf_prompt("box", kTwoFiles, cloud, features);
    CHECK(request.kind == llm::RequestKind::kUrdfGeneration);

    auto count = [&](const std::string& needle) {
      std::size_t n = 0, at = 0;
      while ((at = request.user.find(needle, at)) != std::string::npos) {
        ++n;
        at += needle.size();
      }
      return n;
    };
    CHECK(count("[[slot global") == 1);
    CHECK(count("[[slot part") == 2);
    CHECK(count(std::string(llm::kGlobalStart)) == 1);
    CHECK(count(std::string(llm::kPartStart)) == 1);
    // part order is the filename order
    CHECK(request.user.find("[[slot part 0 parts/cab_base.ply") <
          request.user.find("[[slot part 1 parts/cab_door.ply"));
    // global block precedes the part block
    CHECK(request.user.find(std::string(llm::kGlobalStart)) <
          request.user.find(std::string(llm::kPartStart)));
    // structure prior carries bbox data
    CHECK(request.user.find("Structure prior") != std::string::npos);
    REQUIRE(request.slots.size() == 3);
    CHECK(request.slots[0].kind == llm::SlotKind::kGlobal);
    CHECK(request.slots[1].part_index == 0);
    CHECK(request.slots[2].part_index == 1);
  }

  SUBCASE("deterministic: identical inputs render identical text") {
    auto a = llm::build_urdf_prompt("box", kTwoFiles, cloud, features);
    auto b = llm::build_urdf_prompt("box", kTwoFiles, cloud, features);
    CHECK(a.user == b.user);
    CHECK(a.system == b.system);
    CHECK(llm::request_hash(a) == llm::request_hash(b));
  }

  SUBCASE("OrderMismatch cases") {
    CHECK_THROWS_AS(llm::build_urdf_prompt("box", {}, cloud, features), Error);
    std::vector<std::string> shuffled = {"parts/cab_door.ply",
                                         "parts/cab_base.ply"};
    try {
      llm::build_urdf_prompt("box", shuffled, cloud, features);
      FAIL("expected OrderMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == errc::order_mismatch);
    }
  }
}

TEST_CASE("build_scene_id_prompt") {
  SUBCASE("enumerates objects with asset ids") {
    auto request = llm::build_scene_id_prompt(
        R"({"scene_id":"s","objects":[
          {"asset_id":"cab_1","name":"cabinet","description":"wood cabinet"},
          {"asset_id":"apple_2","name":"apple","description":"red fruit"}]})");
    CHECK(request.kind == llm::RequestKind::kSceneIdentification);
    CHECK(request.user.find("cab_1") != std::string::npos);
    CHECK(request.user.find("apple_2") != std::string::npos);
    CHECK(request.scene_objects.size() == 2);
  }

  SUBCASE("empty scene renders a valid prompt") {
    auto request = llm::build_scene_id_prompt(R"({"objects":[]})");
    CHECK(request.scene_objects.empty());
    CHECK(request.user.find("Scene objects:") != std::string::npos);
  }

  SUBCASE("missing asset ids are MalformedScene") {
    try {
      llm::build_scene_id_prompt(R"({"objects":[{"name":"cabinet"}]})");
      FAIL("expected MalformedScene");
    } catch (const Error& e) {
      CHECK(e.code() == errc::malformed_scene);
    }
    CHECK_THROWS_AS(llm::build_scene_id_prompt("not json"), Error);
  }
}

TEST_CASE("MockBackend") {
  geom::StubBackend features;
  auto cloud = two_part_cloud();
  auto request = llm::build_urdf_prompt("box", kTwoFiles, cloud, features);

  SUBCASE("canned responses are returned verbatim with usage recorded") {
    llm::MockBackend mock;
    mock.add_canned(request, "CANNED");
    auto response = llm::complete(mock, request);
    CHECK(response.text == "CANNED");
    CHECK(response.input_tokens == request.user.size());
  }

  SUBCASE("rule: two parts give base plus revolute door child") {
    llm::MockBackend mock;
    auto response = llm::complete(mock, request);
    auto parsed =
        chain::repair_chain(response.text, chain::RepairPolicy::kNone);
    CHECK(parsed.repairs.empty());
    CHECK(chain::error_count(chain::check_consistency(
              parsed.json_tree, parsed.urdf.tree)) == 0);
    REQUIRE(parsed.urdf.tree.joints().size() == 1);
    CHECK(parsed.urdf.tree.joints()[0].type() == kin::JointType::kRevolute);
    CHECK(base_link(parsed.urdf.tree) == "cab_base");
  }

  SUBCASE("rule: drawer parts become prismatic along the long extent") {
    std::vector<geom::NamedMesh> parts;
    parts.push_back({"stand_base", box_mesh({0, 0, 0}, {1, 1, 1})});
    parts.push_back({"stand_drawer", box_mesh({0, 0, 0.2}, {0.9, 0.4, 0.5})});
    auto drawer_cloud = geom::build_object_cloud("stand", parts, 512, 512, 3);
    auto drawer_request = llm::build_urdf_prompt(
        "stand", {"parts/stand_base.ply", "parts/stand_drawer.ply"},
        drawer_cloud, features);
    llm::MockBackend mock;
    auto parsed = chain::repair_chain(
        llm::complete(mock, drawer_request).text, chain::RepairPolicy::kNone);
    REQUIRE(parsed.urdf.tree.joints().size() == 1);
    CHECK(parsed.urdf.tree.joints()[0].type() == kin::JointType::kPrismatic);
    // longest drawer extent is x
    CHECK((*parsed.urdf.tree.joints()[0].axis() - Eigen::Vector3d(1, 0, 0))
              .norm() < 1e-12);
  }

  SUBCASE("mock determinism: identical requests, identical bytes") {
    llm::MockBackend a, b;
    CHECK(a.complete(request).text == b.complete(request).text);
    CHECK(a.complete(request).text == a.complete(request).text);
  }

  SUBCASE("identification rule keys off keywords") {
    auto id_request = llm::build_scene_id_prompt(
        R"({"objects":[
          {"asset_id":"cab_1","name":"cabinet","description":"a cabinet with one door"},
          {"asset_id":"apple_2","name":"apple","description":"red fruit"}]})");
    llm::MockBackend mock;
    auto response = llm::complete(mock, id_request);
    auto block = chain::extract_json_block(response.text);
    REQUIRE(block.has_value());
    CHECK(block->find("cab_1") != std::string::npos);
    CHECK(block->find("apple_2") == std::string::npos);
  }

  SUBCASE("without rules, unknown requests are an error") {
    llm::MockBackend mock;
    mock.set_rules_enabled(false);
    CHECK_THROWS_AS(mock.complete(request), Error);
  }

  SUBCASE("canned responses load from a directory of <hash>.txt files") {
    auto dir = std::filesystem::temp_directory_path() / "artic_canned";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    {
      std::ofstream out(dir / (llm::request_hash(request) + ".txt"));
      out << "FROM DISK";
    }
    llm::MockBackend mock(dir);
    CHECK(mock.complete(request).text == "FROM DISK");
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(llm::MockBackend("/nonexistent/canned"), Error);
  }
}

TEST_CASE("encode validates the backend contract") {
  struct BrokenBackend final : geom::FeatureBackend {
    std::string_view name() const override { return "broken"; }
    std::size_t dim() const override { return 16; }
    bool concurrent_ok() const override { return true; }
    geom::FeatureVector encode(const geom::PartCloud&) const override {
      return geom::FeatureVector{{1.0, 2.0}};  // wrong dimension
    }
  };
  geom::PartCloud cloud;
  cloud.points = {{0, 0, 0}, {1, 0, 0}};
  BrokenBackend backend;
  try {
    geom::encode(backend, cloud);
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == errc::backend_unavailable);
  }
}

TEST_CASE("HttpBackend") {
  geom::StubBackend features;
  auto cloud = two_part_cloud();
  auto request = llm::build_urdf_prompt("box", kTwoFiles, cloud, features);

  SUBCASE("happy path against a local server") {
    httplib::Server server;
    std::string seen_body;
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                  seen_body = req.body;
                  res.set_content(
                      R"({"choices":[{"message":{"role":"assistant","content":"hello"}}],)"
                      R"("usage":{"prompt_tokens":12,"completion_tokens":3}})",
                      "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    llm::HttpBackendConfig config;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) +
                      "/v1/chat/completions";
    config.model = "test-model";
    config.max_attempts = 1;
    llm::HttpBackend backend(config);
    auto response = llm::complete(backend, request);
    CHECK(response.text == "hello");
    CHECK(response.input_tokens == 12);
    CHECK(response.output_tokens == 3);
    CHECK(seen_body.find("\"model\":\"test-model\"") != std::string::npos);
    CHECK(seen_body.find("\"temperature\":0.0") != std::string::npos);

    server.stop();
    server_thread.join();
  }

  SUBCASE("401 maps to Unauthorized without retries") {
    httplib::Server server;
    server.Post("/v1/chat/completions",
                [](const httplib::Request&, httplib::Response& res) {
                  res.status = 401;
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    llm::HttpBackendConfig config;
    config.endpoint =
        "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    config.max_attempts = 3;
    config.base_delay_ms = 1;
    llm::HttpBackend backend(config);
    try {
      backend.complete(request);
      FAIL("expected Unauthorized");
    } catch (const Error& e) {
      CHECK(e.code() == errc::unauthorized);
    }
    server.stop();
    server_thread.join();
  }

  SUBCASE("unreachable endpoint times out after bounded retries") {
    llm::HttpBackendConfig config;
    config.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    config.max_attempts = 2;
    config.base_delay_ms = 1;
    config.timeout_ms = 200;
    llm::HttpBackend backend(config);
    try {
      backend.complete(request);
      FAIL("expected Timeout");
    } catch (const Error& e) {
      CHECK(e.code() == errc::timeout);
    }
  }
}
