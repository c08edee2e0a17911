#pragma once

#include <optional>
#include <string>
#include <vector>

#include "artic/kinematics.hpp"
#include "artic/urdf_io.hpp"

namespace artic::chain {

// The model frames its two outputs with these exact token strings. They are
// special tokens in the model vocabulary and are matched case-sensitively as
// literal substrings.
inline constexpr std::string_view kJsonStart = "<json_start>";
inline constexpr std::string_view kJsonEnd = "<json_end>";
inline constexpr std::string_view kUrdfStart = "<urdf_start>";
inline constexpr std::string_view kUrdfEnd = "<urdf_end>";

/// Parameter-free kinematic tree as emitted in the JSON block: part names,
/// joint types and nesting only. The root carries joint_type "base".
struct JsonTreeNode {
  std::string part;
  std::string joint_type;
  std::optional<std::string> joint_name;
  std::vector<JsonTreeNode> children;
};

/// Inner texts of the json and urdf blocks, whitespace-trimmed. Prose
/// outside the blocks is ignored.
struct Blocks {
  std::string json_text;
  std::string urdf_text;
  std::size_t json_begin = 0;
  std::size_t urdf_begin = 0;
};

Blocks extract_blocks(const std::string& raw);

/// Extraction for single-block responses (e.g. scene identification).
std::optional<std::string> extract_json_block(const std::string& raw);

JsonTreeNode parse_json_tree(const std::string& json_text);

enum class InconsistencyKind {
  kMissingPart,        // named in URDF, absent from JSON
  kExtraPart,          // named in JSON, absent from URDF
  kRootMismatch,
  kEdgeMismatch,
  kJointTypeMismatch,
  kCompoundJoint,      // contracted edge crosses >1 movable joint
  kJointNameMismatch,
};

enum class Severity { kError, kNote };

struct Inconsistency {
  InconsistencyKind kind;
  Severity severity;
  std::string part;
  std::string message;
};

std::string_view to_string(InconsistencyKind kind);

/// Structural agreement between the JSON tree and the URDF tree after
/// contracting virtual helper links out of the URDF side. Inconsistencies
/// are returned, never thrown; notes (compound joints with a matching type,
/// joint-name disagreements) do not count as errors.
std::vector<Inconsistency> check_consistency(const JsonTreeNode& json_tree,
                                             const kin::KinematicTree& tree);

int error_count(const std::vector<Inconsistency>& list);

enum class RepairPolicy { kNone, kBounded };

enum class RepairKind {
  kFenceStripped,
  kTrailingCommaRemoved,
  kUnterminatedTagClosed,
  kRobotNameSynthesized,
};

std::string_view to_string(RepairKind kind);

struct Repair {
  RepairKind kind;
  std::string block;  // "json" or "urdf"
};

struct ReasoningChain {
  std::string raw;
  JsonTreeNode json_tree;
  urdf::UrdfDocument urdf;
  std::vector<Repair> repairs;
};

/// Tolerant ingestion of a raw model response. The repair list is bounded
/// and enumerated: strip markdown code fences, trim trailing commas in the
/// JSON block, close a single unterminated final XML tag, synthesize a
/// missing robot name ("object"). Every applied repair is recorded. Policy
/// kNone disables all of them, making this exactly extract + parse.
ReasoningChain repair_chain(const std::string& raw, RepairPolicy policy);

/// Audit-log form: json_tree, urdf_text, repairs and inconsistencies.
std::string chain_report_json(const ReasoningChain& chain,
                              const std::vector<Inconsistency>& inconsistencies);

}  // namespace artic::chain
