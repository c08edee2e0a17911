#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace artic {

/// Every failure the library reports carries one of these codes so callers
/// (and tests) can dispatch without matching message text.
enum class errc {
  // kinematic tree construction
  duplicate_link,
  unknown_link_reference,
  multiple_parents,
  cycle_detected,
  multiple_base_links,
  disconnected_link,
  bad_axis,
  bad_limit,
  bad_pose,
  // URDF text
  xml_malformed,
  subset_violation,
  bad_number,
  // reasoning chain
  missing_block,
  duplicate_block,
  blocks_out_of_order,
  unterminated_block,
  json_malformed,
  unknown_joint_type,
  duplicate_part,
  missing_field,
  unexpected_field,
  // geometry
  io_error,
  format_error,
  empty_mesh,
  empty_cloud,
  backend_unavailable,
  // metrics
  degenerate_bbox,
  // chat backends
  order_mismatch,
  malformed_scene,
  timeout,
  rate_limited,
  unauthorized,
  backend_error,
  response_unparseable,
  // scene pipeline
  schema_error,
  missing_geometry,
};

const char* errc_name(errc code);

/// Exception type used throughout. For errors detected while scanning text
/// (URDF, JSON, model responses) `position()` holds the byte offset.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message);
  Error(errc code, const std::string& message, std::size_t position);

  errc code() const noexcept { return code_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  errc code_;
  std::optional<std::size_t> position_;
};

[[noreturn]] void fail(errc code, const std::string& message);
[[noreturn]] void fail_at(errc code, const std::string& message, std::size_t position);

}  // namespace artic
