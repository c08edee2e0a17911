#include "artic/error.hpp"

namespace artic {

namespace {

std::string compose(errc code, const std::string& message,
                    std::optional<std::size_t> position) {
  std::string out = errc_name(code);
  out += ": ";
  out += message;
  if (position) {
    out += " (byte ";
    out += std::to_string(*position);
    out += ")";
  }
  return out;
}

}  // namespace

const char* errc_name(errc code) {
  switch (code) {
    case errc::duplicate_link: return "DuplicateLink";
    case errc::unknown_link_reference: return "UnknownLinkReference";
    case errc::multiple_parents: return "MultipleParents";
    case errc::cycle_detected: return "CycleDetected";
    case errc::multiple_base_links: return "MultipleBaseLinks";
    case errc::disconnected_link: return "DisconnectedLink";
    case errc::bad_axis: return "BadAxis";
    case errc::bad_limit: return "BadLimit";
    case errc::bad_pose: return "BadPose";
    case errc::xml_malformed: return "XmlMalformed";
    case errc::subset_violation: return "SubsetViolation";
    case errc::bad_number: return "BadNumber";
    case errc::missing_block: return "MissingBlock";
    case errc::duplicate_block: return "DuplicateBlock";
    case errc::blocks_out_of_order: return "BlocksOutOfOrder";
    case errc::unterminated_block: return "UnterminatedBlock";
    case errc::json_malformed: return "JsonMalformed";
    case errc::unknown_joint_type: return "UnknownJointType";
    case errc::duplicate_part: return "DuplicatePart";
    case errc::missing_field: return "MissingField";
    case errc::unexpected_field: return "UnexpectedField";
    case errc::io_error: return "IoError";
    case errc::format_error: return "FormatError";
    case errc::empty_mesh: return "EmptyMesh";
    case errc::empty_cloud: return "EmptyCloud";
    case errc::backend_unavailable: return "BackendUnavailable";
    case errc::degenerate_bbox: return "DegenerateBBox";
    case errc::order_mismatch: return "OrderMismatch";
    case errc::malformed_scene: return "MalformedScene";
    case errc::timeout: return "Timeout";
    case errc::rate_limited: return "RateLimited";
    case errc::unauthorized: return "Unauthorized";
    case errc::backend_error: return "BackendError";
    case errc::response_unparseable: return "ResponseUnparseable";
    case errc::schema_error: return "SchemaError";
    case errc::missing_geometry: return "MissingGeometry";
  }
  return "UnknownError";
}

Error::Error(errc code, const std::string& message)
    : std::runtime_error(compose(code, message, std::nullopt)), code_(code) {}

Error::Error(errc code, const std::string& message, std::size_t position)
    : std::runtime_error(compose(code, message, position)),
      code_(code),
      position_(position) {}

void fail(errc code, const std::string& message) { throw Error(code, message); }

void fail_at(errc code, const std::string& message, std::size_t position) {
  throw Error(code, message, position);
}

}  // namespace artic
