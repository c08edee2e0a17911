#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "artic/metrics.hpp"
#include "artic/scene_pipeline.hpp"
#include "artic/urdf_io.hpp"

namespace artic::cli {

/// Exit-code contract: 0 success, 1 domain failure, 2 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

enum class OutputFormat { kMarkdown, kJson };

struct CliConfig {
  std::filesystem::path backend_config;
  metrics::EvalConfig eval;
  std::size_t global_samples = 8192;
  std::size_t part_samples = 8192;
  std::uint64_t seed = 0;
  OutputFormat format = OutputFormat::kMarkdown;
  chain::RepairPolicy repair_policy = chain::RepairPolicy::kBounded;
  bool copy_meshes = true;
  bool log_config = true;  // every run logs the effective config
};

int cmd_validate(const std::filesystem::path& urdf_path,
                 urdf::Strictness mode, std::ostream& out, std::ostream& err);

/// Pairs pred_dir/*.urdf with gt_dir/*.urdf by filename, evaluates each
/// pair, and prints per-object rows plus aggregate rows in Table-style
/// column order (TC, APD, OPD, ALD, DLD, usability). With a split file
/// ({"id": [...], "ood": [...]}) the aggregate is reported per split as
/// ALL/ID/OOD.
int cmd_eval(const std::filesystem::path& pred_dir,
             const std::filesystem::path& gt_dir, const CliConfig& config,
             const std::optional<std::filesystem::path>& out_json,
             const std::optional<std::filesystem::path>& split_file,
             std::ostream& out, std::ostream& err);

int cmd_convert(const std::filesystem::path& scene_path,
                const CliConfig& config,
                const std::optional<std::filesystem::path>& gt_dir,
                const std::filesystem::path& out_dir, std::ostream& out,
                std::ostream& err);

int cmd_sample(const std::filesystem::path& mesh_path, std::size_t count,
               std::uint64_t seed, bool normalize,
               const std::filesystem::path& out_path, std::ostream& out,
               std::ostream& err);

}  // namespace artic::cli
