#include "artic/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "report_json.hpp"
#include "text_util.hpp"

namespace artic::cli {

namespace {

using nlohmann::json;

void log_effective_config(const CliConfig& config, std::ostream& err) {
  if (!config.log_config) return;
  err << "config: seed=" << config.seed
      << " samples=" << config.part_samples << "/" << config.global_samples
      << " weights=(" << config.eval.weights.origin << ","
      << config.eval.weights.axis << "," << config.eval.weights.type
      << ") cutoff=" << config.eval.weights.cost_cutoff << " thresholds=(o="
      << config.eval.thresholds.origin
      << ",a=" << config.eval.thresholds.axis_rad
      << ",iou=" << config.eval.thresholds.range_iou << ") format="
      << (config.format == OutputFormat::kJson ? "json" : "markdown") << "\n";
}

int exit_code_for(const Error& e) {
  return e.code() == errc::io_error ? kExitUsage : kExitDomain;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(errc::io_error, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::filesystem::path> urdf_files(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    fail(errc::io_error, "'" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".urdf") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string("-");
}

struct EvalRow {
  std::string object_id;
  bool parsed = true;
  std::string error;
  std::optional<metrics::MetricReport> report;
};

struct Aggregate {
  std::size_t objects = 0;
  std::size_t parse_failures = 0;
  std::size_t type_hits = 0;
  std::size_t gt_joints = 0;
  double apd_sum = 0; std::size_t apd_n = 0;
  double opd_sum = 0; std::size_t opd_n = 0;
  double ald_sum = 0; std::size_t ald_n = 0;
  double dld_sum = 0; std::size_t dld_n = 0;
  std::size_t usable = 0;

  void add(const metrics::MetricReport& report) {
    ++objects;
    gt_joints += report.gt_joint_count;
    for (const metrics::JointDiff& diff : report.diffs) {
      if (diff.type_ok) ++type_hits;
      opd_sum += diff.origin_dist;
      ++opd_n;
      if (diff.axis_angle) { apd_sum += *diff.axis_angle; ++apd_n; }
      if (diff.angle_limit_err) { ald_sum += *diff.angle_limit_err; ++ald_n; }
      if (diff.dist_limit_err) { dld_sum += *diff.dist_limit_err; ++dld_n; }
    }
    if (report.usable) ++usable;
  }

  json to_json(const std::string& label) const {
    json out;
    out["split"] = label;
    out["objects"] = objects;
    out["parse_failures"] = parse_failures;
    out["tc"] = gt_joints == 0 ? 1.0
                               : static_cast<double>(type_hits) /
                                     static_cast<double>(gt_joints);
    if (apd_n) out["apd"] = apd_sum / static_cast<double>(apd_n);
    if (opd_n) out["opd"] = opd_sum / static_cast<double>(opd_n);
    if (ald_n) out["ald"] = ald_sum / static_cast<double>(ald_n);
    if (dld_n) out["dld"] = dld_sum / static_cast<double>(dld_n);
    out["usability"] =
        objects == 0 ? 0.0
                     : static_cast<double>(usable) / static_cast<double>(objects);
    return out;
  }
};

std::string agg_markdown_row(const json& agg) {
  auto opt = [&agg](const char* key) {
    return agg.contains(key) ? fmt(agg[key].get<double>()) : std::string("-");
  };
  std::ostringstream row;
  row << "| " << agg["split"].get<std::string>() << " ("
      << agg["objects"].get<std::size_t>() << " objects) | "
      << fmt(agg["tc"].get<double>() * 100.0) << " | " << opt("apd") << " | "
      << opt("opd") << " | " << opt("ald") << " | " << opt("dld") << " | "
      << fmt(agg["usability"].get<double>() * 100.0) << "% |";
  return row.str();
}

}  // namespace

int cmd_validate(const std::filesystem::path& urdf_path,
                 urdf::Strictness mode, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = read_file(urdf_path);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
  try {
    urdf::UrdfDocument doc = urdf::parse_urdf(text, mode);
    out << urdf_path.string() << ": valid ("
        << doc.tree.links().size() << " links, " << doc.tree.joints().size()
        << " joints, robot '" << doc.tree.robot_name() << "')\n";
    return kExitOk;
  } catch (const Error& e) {
    err << urdf_path.string() << ": " << e.what() << "\n";
    return kExitDomain;
  }
}

int cmd_eval(const std::filesystem::path& pred_dir,
             const std::filesystem::path& gt_dir, const CliConfig& config,
             const std::optional<std::filesystem::path>& out_json,
             const std::optional<std::filesystem::path>& split_file,
             std::ostream& out, std::ostream& err) {
  log_effective_config(config, err);

  std::vector<std::filesystem::path> pred_files;
  std::vector<std::filesystem::path> gt_files;
  try {
    pred_files = urdf_files(pred_dir);
    gt_files = urdf_files(gt_dir);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  std::map<std::string, std::filesystem::path> gt_by_name;
  for (const auto& path : gt_files) gt_by_name.emplace(path.stem().string(), path);
  std::map<std::string, std::filesystem::path> pred_by_name;
  for (const auto& path : pred_files) {
    pred_by_name.emplace(path.stem().string(), path);
  }

  for (const auto& [name, path] : pred_by_name) {
    if (!gt_by_name.count(name)) {
      err << "warning: UnpairedFile pred '" << name << ".urdf'\n";
    }
  }
  for (const auto& [name, path] : gt_by_name) {
    if (!pred_by_name.count(name)) {
      err << "warning: UnpairedFile gt '" << name << ".urdf'\n";
    }
  }

  std::vector<EvalRow> rows;
  bool any_parse_failure = false;
  for (const auto& [name, gt_path] : gt_by_name) {
    auto pred_it = pred_by_name.find(name);
    if (pred_it == pred_by_name.end()) continue;
    EvalRow row;
    row.object_id = name;
    try {
      urdf::UrdfDocument pred =
          urdf::parse_urdf(read_file(pred_it->second), urdf::Strictness::kLenient);
      urdf::UrdfDocument gt =
          urdf::parse_urdf(read_file(gt_path), urdf::Strictness::kLenient);

      metrics::EvalConfig eval = config.eval;
      kin::KinematicTree pred_tree = pred.tree;
      kin::KinematicTree gt_tree = gt.tree;
      // bbox scale from gt geometry when the referenced meshes resolve
      try {
        std::vector<Eigen::Vector3d> gt_points;
        for (const kin::LinkSpec& link : gt.tree.links()) {
          if (link.is_virtual()) continue;
          std::filesystem::path mesh_path = *link.mesh();
          if (mesh_path.is_relative()) {
            mesh_path = gt_path.parent_path() / mesh_path;
          }
          geom::TriangleMesh mesh = geom::load_mesh(mesh_path);
          gt_points.insert(gt_points.end(), mesh.vertices.begin(),
                           mesh.vertices.end());
        }
        geom::Aabb box = geom::bounds_of(gt_points);
        pred_tree = metrics::normalize_tree(pred.tree, box.center(),
                                            box.diagonal());
        gt_tree = metrics::normalize_tree(gt.tree, box.center(),
                                          box.diagonal());
      } catch (const Error&) {
        eval.normalization_label = "none";
        err << "warning: '" << name
            << "' evaluated without bbox normalization (gt meshes not "
               "loadable)\n";
      }
      row.report = metrics::evaluate(pred_tree, gt_tree, eval);
    } catch (const Error& e) {
      row.parsed = false;
      row.error = e.what();
      any_parse_failure = true;
    }
    rows.push_back(std::move(row));
  }

  // Optional ID/OOD split.
  std::map<std::string, std::string> split_of;
  if (split_file) {
    try {
      json split = json::parse(read_file(*split_file));
      for (const char* key : {"id", "ood"}) {
        if (split.contains(key) && split[key].is_array()) {
          for (const json& name : split[key]) {
            if (name.is_string()) split_of[name.get<std::string>()] = key;
          }
        }
      }
    } catch (const std::exception& e) {
      err << "warning: split file ignored: " << e.what() << "\n";
    }
  }

  Aggregate all;
  Aggregate in_dist;
  Aggregate out_dist;
  json object_reports = json::object();
  for (const EvalRow& row : rows) {
    if (!row.parsed) {
      ++all.parse_failures;
      object_reports[row.object_id] = {{"error", row.error}};
      continue;
    }
    all.add(*row.report);
    object_reports[row.object_id] = metrics::report_json(*row.report);
    auto it = split_of.find(row.object_id);
    if (it != split_of.end()) {
      (it->second == "id" ? in_dist : out_dist).add(*row.report);
    }
  }

  json result;
  result["schema"] = std::string(metrics::kDefinitionsVersion);
  result["objects"] = std::move(object_reports);
  result["aggregate"] = json::array();
  result["aggregate"].push_back(all.to_json("ALL"));
  if (!split_of.empty()) {
    result["aggregate"].push_back(in_dist.to_json("ID"));
    result["aggregate"].push_back(out_dist.to_json("OOD"));
  }

  if (out_json) {
    std::ofstream json_out(*out_json, std::ios::binary);
    if (!json_out) {
      err << "cannot write '" << out_json->string() << "'\n";
      return kExitUsage;
    }
    json_out << result.dump(2) << "\n";
  }

  if (config.format == OutputFormat::kJson) {
    out << result.dump(2) << "\n";
  } else {
    out << "| Object | TC (%) | APD | OPD | ALD | DLD | Usable |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const EvalRow& row : rows) {
      if (!row.parsed) {
        out << "| " << row.object_id << " | parse failure: " << row.error
            << " | | | | | |\n";
        continue;
      }
      const metrics::MetricReport& r = *row.report;
      out << "| " << row.object_id << " | " << fmt(r.tc * 100.0) << " | "
          << fmt_opt(r.apd) << " | " << fmt_opt(r.opd) << " | "
          << fmt_opt(r.ald) << " | " << fmt_opt(r.dld) << " | "
          << (r.usable ? "yes" : "no") << " |\n";
    }
    for (const json& agg : result["aggregate"]) {
      out << agg_markdown_row(agg) << "\n";
    }
  }

  return any_parse_failure ? kExitDomain : kExitOk;
}

int cmd_convert(const std::filesystem::path& scene_path,
                const CliConfig& config,
                const std::optional<std::filesystem::path>& gt_dir,
                const std::filesystem::path& out_dir, std::ostream& out,
                std::ostream& err) {
  log_effective_config(config, err);
  if (config.backend_config.empty()) {
    err << "usage error: --backend <config.json> is required\n";
    return kExitUsage;
  }

  try {
    std::unique_ptr<llm::ChatBackend> backend =
        llm::make_backend(config.backend_config);
    scene::SceneDescription scene = scene::load_scene(scene_path);

    std::optional<scene::GroundTruth> gt;
    if (gt_dir) gt = scene::load_ground_truth(*gt_dir);

    scene::PipelineConfig pipeline;
    pipeline.global_samples = config.global_samples;
    pipeline.part_samples = config.part_samples;
    pipeline.seed = config.seed;
    pipeline.repair_policy = config.repair_policy;
    pipeline.eval = config.eval;
    pipeline.copy_meshes = config.copy_meshes;

    geom::StubBackend features;
    scene::SceneManifest manifest =
        scene::run_scene(scene, *backend, features, gt, out_dir, pipeline);

    for (const scene::ArticulationResult& result : manifest.results) {
      out << result.asset_id << ": " << scene::to_string(result.status);
      if (!result.error.empty()) out << " (" << result.error << ")";
      if (result.report) {
        out << " usable=" << (result.report->usable ? "yes" : "no");
      }
      out << "\n";
    }
    for (const std::string& warning : manifest.warnings) {
      err << "warning: " << warning << "\n";
    }
    if (manifest.report) {
      out << "Sim-Id: " << manifest.report->sim_id_counts()
          << (manifest.report->sim_id_scene ? " scene=pass" : " scene=fail")
          << "\n";
      out << "Sim-Us: " << manifest.report->sim_us_counts()
          << (manifest.report->sim_us_scene ? " scene=pass" : " scene=fail")
          << "\n";
    }
    out << "manifest: "
        << (manifest.urdf_dir / "manifest.json").string() << "\n";
    out << "canonical_hash: " << manifest.canonical_hash << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitDomain;
  }
}

int cmd_sample(const std::filesystem::path& mesh_path, std::size_t count,
               std::uint64_t seed, bool normalize,
               const std::filesystem::path& out_path, std::ostream& out,
               std::ostream& err) {
  try {
    geom::TriangleMesh mesh = geom::load_mesh(mesh_path);
    geom::PartCloud cloud = geom::sample_surface(
        mesh, count, seed, mesh_path.stem().string());
    if (normalize) cloud = geom::normalize_part(cloud);
    geom::write_cloud_ply(cloud, out_path);
    out << out_path.string() << ": " << cloud.points.size() << " points ("
        << (normalize ? "normalized" : "raw") << ", seed " << seed << ")\n";
    return kExitOk;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace artic::cli
