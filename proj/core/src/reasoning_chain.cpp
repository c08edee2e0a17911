#include "artic/reasoning_chain.hpp"

#include <cctype>
#include <json.hpp>
#include <map>
#include <set>
#include <unordered_map>

#include "xml_reader.hpp"

namespace artic::chain {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct Span {
  std::size_t content_begin;
  std::size_t content_end;
  std::size_t block_begin;
  std::size_t block_end;
};

Span find_block(const std::string& raw, std::string_view start_tok,
                std::string_view end_tok, const char* which) {
  std::size_t start = raw.find(start_tok);
  if (start == std::string::npos) {
    fail(errc::missing_block, std::string("no ") + which + " block");
  }
  if (raw.find(start_tok, start + start_tok.size()) != std::string::npos) {
    fail_at(errc::duplicate_block, std::string("second ") + which + " block",
            raw.find(start_tok, start + start_tok.size()));
  }
  std::size_t content = start + start_tok.size();
  std::size_t end = raw.find(end_tok, content);
  if (end == std::string::npos) {
    fail_at(errc::unterminated_block,
            std::string(which) + " block is never closed", start);
  }
  return Span{content, end, start, end + end_tok.size()};
}

// --- JSON tree -------------------------------------------------------------

const char* const kAllowedFields[] = {"part", "joint_type", "joint_name",
                                      "children"};

JsonTreeNode convert_node(const json& node, bool is_root,
                          std::set<std::string>& part_names) {
  if (!node.is_object()) {
    fail(errc::json_malformed, "tree node must be a JSON object");
  }
  for (const auto& [key, value] : node.items()) {
    bool known = false;
    for (const char* allowed : kAllowedFields) {
      if (key == allowed) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail(errc::unexpected_field,
           "'" + key + "' (the JSON tree carries no numeric parameters)");
    }
  }

  JsonTreeNode out;
  if (!node.contains("part")) {
    fail(errc::missing_field, "part");
  }
  if (!node["part"].is_string()) {
    fail(errc::json_malformed, "'part' must be a string");
  }
  out.part = node["part"].get<std::string>();
  if (out.part.empty()) {
    fail(errc::missing_field, "part (empty name)");
  }
  if (!part_names.insert(out.part).second) {
    fail(errc::duplicate_part, out.part);
  }

  if (!node.contains("joint_type") || node["joint_type"].is_null()) {
    if (!is_root) {
      fail(errc::missing_field, "joint_type on part '" + out.part + "'");
    }
    out.joint_type = "base";  // root may omit it
  } else {
    if (!node["joint_type"].is_string()) {
      fail(errc::json_malformed, "'joint_type' must be a string");
    }
    out.joint_type = node["joint_type"].get<std::string>();
    if (out.joint_type == "base") {
      if (!is_root) {
        fail(errc::unknown_joint_type,
             "'base' outside the root (part '" + out.part + "')");
      }
    } else if (out.joint_type != "revolute" && out.joint_type != "prismatic" &&
               out.joint_type != "fixed") {
      fail(errc::unknown_joint_type,
           "'" + out.joint_type + "' on part '" + out.part + "'");
    }
  }

  if (node.contains("joint_name")) {
    if (!node["joint_name"].is_string()) {
      fail(errc::json_malformed, "'joint_name' must be a string");
    }
    out.joint_name = node["joint_name"].get<std::string>();
  }

  if (node.contains("children")) {
    if (!node["children"].is_array()) {
      fail(errc::json_malformed, "'children' must be an array");
    }
    for (const json& child : node["children"]) {
      out.children.push_back(convert_node(child, false, part_names));
    }
  }
  return out;
}

json node_to_json(const JsonTreeNode& node) {
  json out;
  out["part"] = node.part;
  out["joint_type"] = node.joint_type;
  if (node.joint_name) out["joint_name"] = *node.joint_name;
  out["children"] = json::array();
  for (const JsonTreeNode& child : node.children) {
    out["children"].push_back(node_to_json(child));
  }
  return out;
}

// --- consistency -----------------------------------------------------------

struct ContractedEdge {
  std::string parent;                         // nearest non-virtual ancestor
  std::vector<const kin::JointSpec*> joints;  // child-to-ancestor order
};

void collect_json_edges(
    const JsonTreeNode& node,
    std::map<std::string, const JsonTreeNode*>& by_part,
    std::map<std::string, std::string>& parent_of) {
  by_part.emplace(node.part, &node);
  for (const JsonTreeNode& child : node.children) {
    parent_of.emplace(child.part, node.part);
    collect_json_edges(child, by_part, parent_of);
  }
}

// --- repairs ---------------------------------------------------------------

bool strip_fences(std::string& text) {
  std::string t = trim(text);
  if (t.rfind("```", 0) != 0) return false;
  std::size_t first_nl = t.find('\n');
  if (first_nl == std::string::npos) return false;
  std::size_t closing = t.rfind("```");
  if (closing == std::string::npos || closing < first_nl) return false;
  text = trim(t.substr(first_nl + 1, closing - first_nl - 1));
  return true;
}

bool strip_trailing_commas(std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  bool changed = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      out += c;
      if (c == '\\' && i + 1 < text.size()) {
        out += text[++i];
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      continue;
    }
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < text.size() &&
             std::isspace(static_cast<unsigned char>(text[j]))) {
        ++j;
      }
      if (j < text.size() && (text[j] == '}' || text[j] == ']')) {
        changed = true;
        continue;  // drop the comma
      }
    }
    out += c;
  }
  if (changed) text = std::move(out);
  return changed;
}

// Insertion point for a synthesized robot name, or npos.
std::size_t robot_name_insert_pos(const std::string& text) {
  std::size_t tag = text.find("<robot");
  while (tag != std::string::npos) {
    char after = tag + 6 < text.size() ? text[tag + 6] : '\0';
    if (after == '>' || after == '/' ||
        std::isspace(static_cast<unsigned char>(after))) {
      break;
    }
    tag = text.find("<robot", tag + 6);
  }
  if (tag == std::string::npos) return std::string::npos;
  std::size_t close = text.find('>', tag);
  if (close == std::string::npos) return std::string::npos;
  std::string_view tag_body(text.data() + tag, close - tag);
  if (tag_body.find("name=") != std::string_view::npos) {
    return std::string::npos;
  }
  return tag + 6;
}

json parse_json_or_fail(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
    fail_at(errc::json_malformed, e.what(), pos);
  }
}

}  // namespace

Blocks extract_blocks(const std::string& raw) {
  Span json_span = find_block(raw, kJsonStart, kJsonEnd, "json");
  Span urdf_span = find_block(raw, kUrdfStart, kUrdfEnd, "urdf");
  if (urdf_span.block_begin < json_span.block_end) {
    fail_at(errc::blocks_out_of_order,
            "the json block must precede the urdf block",
            urdf_span.block_begin);
  }
  Blocks out;
  out.json_text = trim(std::string_view(raw).substr(
      json_span.content_begin, json_span.content_end - json_span.content_begin));
  out.urdf_text = trim(std::string_view(raw).substr(
      urdf_span.content_begin, urdf_span.content_end - urdf_span.content_begin));
  out.json_begin = json_span.content_begin;
  out.urdf_begin = urdf_span.content_begin;
  return out;
}

std::optional<std::string> extract_json_block(const std::string& raw) {
  std::size_t start = raw.find(kJsonStart);
  if (start == std::string::npos) return std::nullopt;
  std::size_t content = start + kJsonStart.size();
  std::size_t end = raw.find(kJsonEnd, content);
  if (end == std::string::npos) return std::nullopt;
  return trim(std::string_view(raw).substr(content, end - content));
}

JsonTreeNode parse_json_tree(const std::string& json_text) {
  json doc = parse_json_or_fail(json_text);
  std::set<std::string> part_names;
  return convert_node(doc, true, part_names);
}

std::string_view to_string(InconsistencyKind kind) {
  switch (kind) {
    case InconsistencyKind::kMissingPart: return "MissingPart";
    case InconsistencyKind::kExtraPart: return "ExtraPart";
    case InconsistencyKind::kRootMismatch: return "RootMismatch";
    case InconsistencyKind::kEdgeMismatch: return "EdgeMismatch";
    case InconsistencyKind::kJointTypeMismatch: return "JointTypeMismatch";
    case InconsistencyKind::kCompoundJoint: return "CompoundJoint";
    case InconsistencyKind::kJointNameMismatch: return "JointNameMismatch";
  }
  return "?";
}

std::vector<Inconsistency> check_consistency(const JsonTreeNode& json_tree,
                                             const kin::KinematicTree& tree) {
  std::vector<Inconsistency> out;
  auto error = [&out](InconsistencyKind kind, std::string part,
                      std::string message) {
    out.push_back(Inconsistency{kind, Severity::kError, std::move(part),
                                std::move(message)});
  };
  auto note = [&out](InconsistencyKind kind, std::string part,
                     std::string message) {
    out.push_back(Inconsistency{kind, Severity::kNote, std::move(part),
                                std::move(message)});
  };

  std::map<std::string, const JsonTreeNode*> json_parts;
  std::map<std::string, std::string> json_parent;
  collect_json_edges(json_tree, json_parts, json_parent);

  // Contract virtual helper links out of the URDF tree.
  std::set<std::string> urdf_parts;
  std::map<std::string, ContractedEdge> contracted;  // child part -> edge
  std::vector<std::string> roots;
  for (const kin::LinkSpec& link : tree.links()) {
    if (link.is_virtual()) continue;
    urdf_parts.insert(link.name());
    ContractedEdge edge;
    const kin::JointSpec* up = tree.parent_joint(link.name());
    while (up) {
      edge.joints.push_back(up);
      const kin::LinkSpec& ancestor = tree.link(up->parent());
      if (!ancestor.is_virtual()) {
        edge.parent = ancestor.name();
        break;
      }
      up = tree.parent_joint(ancestor.name());
    }
    if (edge.parent.empty()) {
      roots.push_back(link.name());
    } else {
      contracted.emplace(link.name(), std::move(edge));
    }
  }

  for (const auto& [part, node] : json_parts) {
    if (!urdf_parts.count(part)) {
      error(InconsistencyKind::kExtraPart, part,
            "part '" + part + "' has no matching URDF link");
    }
  }
  for (const std::string& part : urdf_parts) {
    if (!json_parts.count(part)) {
      error(InconsistencyKind::kMissingPart, part,
            "URDF link '" + part + "' is absent from the JSON tree");
    }
  }

  if (roots.size() != 1) {
    std::string names;
    for (const std::string& r : roots) {
      if (!names.empty()) names += ", ";
      names += r;
    }
    error(InconsistencyKind::kRootMismatch, json_tree.part,
          "URDF has " + std::to_string(roots.size()) +
              " contracted roots [" + names + "]");
  } else if (roots.front() != json_tree.part) {
    error(InconsistencyKind::kRootMismatch, json_tree.part,
          "JSON root '" + json_tree.part + "' vs URDF base '" + roots.front() +
              "'");
  }

  for (const auto& [part, node] : json_parts) {
    if (part == json_tree.part) continue;
    if (!urdf_parts.count(part)) continue;
    auto edge_it = contracted.find(part);
    if (edge_it == contracted.end()) {
      error(InconsistencyKind::kEdgeMismatch, part,
            "part '" + part + "' is a URDF root but a JSON child");
      continue;
    }
    const ContractedEdge& edge = edge_it->second;
    const std::string& json_par = json_parent.at(part);
    if (edge.parent != json_par) {
      error(InconsistencyKind::kEdgeMismatch, part,
            "JSON parent '" + json_par + "' vs URDF contracted parent '" +
                edge.parent + "'");
      continue;
    }

    std::vector<const kin::JointSpec*> movable;
    for (const kin::JointSpec* joint : edge.joints) {
      if (joint->movable()) movable.push_back(joint);
    }
    const std::string& want = node->joint_type;
    if (movable.empty()) {
      if (want != "fixed") {
        error(InconsistencyKind::kJointTypeMismatch, part,
              "JSON says '" + want + "', URDF chain is fixed");
      }
    } else if (movable.size() == 1) {
      std::string have(kin::to_string(movable.front()->type()));
      if (want != have) {
        error(InconsistencyKind::kJointTypeMismatch, part,
              "JSON says '" + want + "', URDF joint '" +
                  movable.front()->name() + "' is " + have);
      }
    } else {
      std::string chain_types;
      bool matched = false;
      for (const kin::JointSpec* joint : movable) {
        if (!chain_types.empty()) chain_types += "+";
        chain_types += std::string(kin::to_string(joint->type()));
        if (want == kin::to_string(joint->type())) matched = true;
      }
      note(InconsistencyKind::kCompoundJoint, part,
           "compound motion (" + chain_types + ") behind part '" + part + "'");
      if (!matched) {
        error(InconsistencyKind::kJointTypeMismatch, part,
              "JSON says '" + want + "', compound chain is " + chain_types);
      }
    }

    if (node->joint_name) {
      bool found = false;
      for (const kin::JointSpec* joint : edge.joints) {
        if (joint->name() == *node->joint_name) {
          found = true;
          break;
        }
      }
      if (!found) {
        note(InconsistencyKind::kJointNameMismatch, part,
             "joint_name '" + *node->joint_name +
                 "' matches no URDF joint on this edge");
      }
    }
  }

  return out;
}

int error_count(const std::vector<Inconsistency>& list) {
  int n = 0;
  for (const Inconsistency& item : list) {
    if (item.severity == Severity::kError) ++n;
  }
  return n;
}

std::string_view to_string(RepairKind kind) {
  switch (kind) {
    case RepairKind::kFenceStripped: return "FenceStripped";
    case RepairKind::kTrailingCommaRemoved: return "TrailingCommaRemoved";
    case RepairKind::kUnterminatedTagClosed: return "UnterminatedTagClosed";
    case RepairKind::kRobotNameSynthesized: return "RobotNameSynthesized";
  }
  return "?";
}

ReasoningChain repair_chain(const std::string& raw, RepairPolicy policy) {
  const bool bounded = policy == RepairPolicy::kBounded;
  Blocks blocks = extract_blocks(raw);
  std::vector<Repair> repairs;

  if (bounded) {
    if (strip_fences(blocks.json_text)) {
      repairs.push_back(Repair{RepairKind::kFenceStripped, "json"});
    }
    if (strip_fences(blocks.urdf_text)) {
      repairs.push_back(Repair{RepairKind::kFenceStripped, "urdf"});
    }
  }

  JsonTreeNode json_tree;
  try {
    json_tree = parse_json_tree(blocks.json_text);
  } catch (const Error& e) {
    if (!bounded || e.code() != errc::json_malformed) throw;
    if (!strip_trailing_commas(blocks.json_text)) throw;
    repairs.push_back(Repair{RepairKind::kTrailingCommaRemoved, "json"});
    json_tree = parse_json_tree(blocks.json_text);
  }

  bool tag_closed = false;
  bool name_added = false;
  std::optional<urdf::UrdfDocument> doc;
  while (!doc) {
    try {
      doc = urdf::parse_urdf(blocks.urdf_text, urdf::Strictness::kStrict);
    } catch (const Error& e) {
      if (bounded && !tag_closed && e.code() == errc::xml_malformed) {
        if (auto tag = xml::unclosed_final_tag(blocks.urdf_text)) {
          blocks.urdf_text += "</" + *tag + ">";
          repairs.push_back(Repair{RepairKind::kUnterminatedTagClosed, "urdf"});
          tag_closed = true;
          continue;
        }
      }
      if (bounded && !name_added && e.code() == errc::subset_violation) {
        std::size_t at = robot_name_insert_pos(blocks.urdf_text);
        if (at != std::string::npos) {
          blocks.urdf_text.insert(at, " name=\"object\"");
          repairs.push_back(Repair{RepairKind::kRobotNameSynthesized, "urdf"});
          name_added = true;
          continue;
        }
      }
      throw;
    }
  }

  return ReasoningChain{raw, std::move(json_tree), std::move(*doc),
                        std::move(repairs)};
}

std::string chain_report_json(
    const ReasoningChain& chain,
    const std::vector<Inconsistency>& inconsistencies) {
  json report;
  report["json_tree"] = node_to_json(chain.json_tree);
  report["urdf_text"] = chain.urdf.text;
  report["repairs"] = json::array();
  for (const Repair& repair : chain.repairs) {
    report["repairs"].push_back(
        {{"kind", std::string(to_string(repair.kind))},
         {"block", repair.block}});
  }
  report["inconsistencies"] = json::array();
  for (const Inconsistency& item : inconsistencies) {
    report["inconsistencies"].push_back(
        {{"kind", std::string(to_string(item.kind))},
         {"severity", item.severity == Severity::kError ? "error" : "note"},
         {"part", item.part},
         {"message", item.message}});
  }
  return report.dump(2);
}

}  // namespace artic::chain
