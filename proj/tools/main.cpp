#include <CLI11.hpp>
#include <iostream>
#include <numbers>

#include "artic/cli_commands.hpp"

namespace {

using artic::cli::CliConfig;
using artic::cli::OutputFormat;

CLI::Option* add_metric_options(CLI::App* cmd, CliConfig& config,
                                double& theta_a_deg) {
  cmd->add_option("--w-origin", config.eval.weights.origin,
                  "Matching weight for origin distance");
  cmd->add_option("--w-axis", config.eval.weights.axis,
                  "Matching weight for axis angle");
  cmd->add_option("--w-type", config.eval.weights.type,
                  "Matching weight for type mismatch");
  cmd->add_option("--cost-cutoff", config.eval.weights.cost_cutoff,
                  "Matches above this cost stay unmatched");
  cmd->add_option("--theta-origin", config.eval.thresholds.origin,
                  "Usability origin threshold (fraction of gt bbox diagonal)");
  CLI::Option* theta_axis = cmd->add_option(
      "--theta-axis-deg", theta_a_deg, "Usability axis threshold in degrees");
  cmd->add_option("--theta-iou", config.eval.thresholds.range_iou,
                  "Usability limit-interval IoU threshold");
  return theta_axis;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "artic: convert rigid 3D assets into articulated URDF objects and "
      "evaluate predicted articulations"};
  app.require_subcommand(1);

  CliConfig config;
  double theta_a_deg = 15.0;
  std::string format = "markdown";

  app.add_option("--seed", config.seed, "Seed for all randomness");
  app.add_option("--format", format, "Output format: markdown | json")
      ->check(CLI::IsMember({"markdown", "json"}));
  app.add_flag("--quiet-config,!--log-config", "Suppress the effective-config log line")
      ->each([&config](const std::string&) { config.log_config = false; });

  // validate
  std::string validate_path;
  bool lenient = false;
  CLI::App* validate = app.add_subcommand(
      "validate", "Parse and validate a URDF file");
  validate->add_option("urdf", validate_path, "URDF file")->required();
  validate->add_flag("--lenient", lenient,
                     "Accept full-URDF dataset files (default: strict subset)");
  bool strict_flag = false;
  validate->add_flag("--strict", strict_flag, "Enforce the strict subset");

  // eval
  std::string pred_dir, gt_dir;
  std::string eval_out, split_file;
  CLI::App* eval = app.add_subcommand(
      "eval", "Evaluate predicted URDFs against ground truth by filename");
  eval->add_option("pred_dir", pred_dir, "Directory of predicted URDFs")
      ->required();
  eval->add_option("gt_dir", gt_dir, "Directory of ground-truth URDFs")
      ->required();
  eval->add_option("--out", eval_out, "Write the JSON report here");
  eval->add_option("--split", split_file,
                   "JSON file with {\"id\": [...], \"ood\": [...]} object splits");
  CLI::Option* eval_theta = add_metric_options(eval, config, theta_a_deg);

  // convert
  std::string scene_path, backend_config, convert_gt, convert_out = "out";
  std::string repair = "bounded";
  bool no_copy_meshes = false;
  CLI::App* convert = app.add_subcommand(
      "convert", "Convert a scene's articulable objects to URDF");
  convert->add_option("scene", scene_path, "Scene description JSON")
      ->required();
  convert->add_option("--backend", backend_config,
                      "Backend config JSON (mock or http)");
  convert->add_option("--gt", convert_gt,
                      "Ground-truth bundle directory (adds Sim-Id/Sim-Us)");
  convert->add_option("--out", convert_out, "Output directory");
  convert->add_option("--part-samples", config.part_samples,
                      "Surface samples per part");
  convert->add_option("--global-samples", config.global_samples,
                      "Surface samples for the whole object");
  convert->add_option("--repair", repair, "Repair policy: none | bounded")
      ->check(CLI::IsMember({"none", "bounded"}));
  convert->add_flag("--no-copy-meshes", no_copy_meshes,
                    "Reference source meshes instead of copying them");
  CLI::Option* convert_theta = add_metric_options(convert, config, theta_a_deg);

  // sample
  std::string sample_mesh, sample_out;
  std::size_t sample_n = 8192;
  bool sample_normalize = false;
  CLI::App* sample = app.add_subcommand(
      "sample", "Sample a surface point cloud from a mesh");
  sample->add_option("mesh", sample_mesh, "Mesh file (.ply or .obj)")
      ->required();
  sample->add_option("--n", sample_n, "Point count");
  sample->add_flag("--normalize", sample_normalize,
                   "Center on the centroid and scale to the unit sphere");
  sample->add_option("--out", sample_out, "Output PLY path")->required();

  CLI11_PARSE(app, argc, argv);

  // the library default (0.2618 rad) stands unless the flag is given
  if (eval_theta->count() > 0 || convert_theta->count() > 0) {
    config.eval.thresholds.axis_rad = theta_a_deg * std::numbers::pi / 180.0;
  }
  config.format =
      format == "json" ? OutputFormat::kJson : OutputFormat::kMarkdown;
  config.repair_policy = repair == "none"
                             ? artic::chain::RepairPolicy::kNone
                             : artic::chain::RepairPolicy::kBounded;
  config.copy_meshes = !no_copy_meshes;
  config.backend_config = backend_config;

  if (validate->parsed()) {
    return artic::cli::cmd_validate(validate_path,
                                    lenient ? artic::urdf::Strictness::kLenient
                                            : artic::urdf::Strictness::kStrict,
                                    std::cout, std::cerr);
  }
  if (eval->parsed()) {
    std::optional<std::filesystem::path> out_path, split_path;
    if (!eval_out.empty()) out_path = eval_out;
    if (!split_file.empty()) split_path = split_file;
    return artic::cli::cmd_eval(pred_dir, gt_dir, config, out_path, split_path,
                                std::cout, std::cerr);
  }
  if (convert->parsed()) {
    std::optional<std::filesystem::path> gt_path;
    if (!convert_gt.empty()) gt_path = convert_gt;
    return artic::cli::cmd_convert(scene_path, config, gt_path, convert_out,
                                   std::cout, std::cerr);
  }
  if (sample->parsed()) {
    return artic::cli::cmd_sample(sample_mesh, sample_n, config.seed,
                                  sample_normalize, sample_out, std::cout,
                                  std::cerr);
  }
  return artic::cli::kExitUsage;
}
