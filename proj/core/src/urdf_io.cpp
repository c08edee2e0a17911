#include "artic/urdf_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "text_util.hpp"
#include "xml_reader.hpp"

namespace artic::urdf {

namespace {

using kin::JointLimit;
using kin::JointSpec;
using kin::JointType;
using kin::LinkSpec;
using kin::Pose;

[[noreturn]] void subset_error(const std::string& message, std::size_t pos) {
  fail_at(errc::subset_violation, message, pos);
}

const std::string& required_attribute(const xml::Element& el,
                                      std::string_view name) {
  const xml::Attribute* attr = el.find_attribute(name);
  if (!attr) {
    subset_error("<" + el.name + "> is missing the '" + std::string(name) +
                     "' attribute",
                 el.begin);
  }
  return attr->value;
}

struct LinkRecord {
  LinkSpec spec;
  std::size_t begin;
  std::size_t end;
};

struct JointRecord {
  JointSpec spec;
  std::size_t begin;
  std::size_t end;
};

class UrdfReader {
 public:
  UrdfReader(const std::string& text, Strictness mode)
      : text_(text), strict_(mode == Strictness::kStrict) {}

  UrdfDocument run() {
    xml::Element root = xml::parse(text_);
    if (root.name != "robot") {
      subset_error("root element must be <robot>, found <" + root.name + ">",
                   root.begin);
    }
    std::string robot_name = required_attribute(root, "name");

    bool joint_seen = false;
    for (const xml::Element& child : root.children) {
      if (child.name == "link") {
        if (strict_ && joint_seen) {
          subset_error(
              "link '" + std::string(child.find_attribute("name")
                                         ? child.find_attribute("name")->value
                                         : "?") +
                  "' declared after a joint; all links must precede joints",
              child.begin);
        }
        read_link(child);
      } else if (child.name == "joint") {
        joint_seen = true;
        read_joint(child);
      } else if (strict_) {
        subset_error("unexpected element <" + child.name + "> under <robot>",
                     child.begin);
      }
      // Lenient: material, transmission, gazebo, ... are skipped.
    }

    validate_structure();

    std::map<std::string, SourceSpan> link_spans;
    std::map<std::string, SourceSpan> joint_spans;
    for (const LinkRecord& rec : links_) {
      link_spans.emplace(rec.spec.name(), SourceSpan{rec.begin, rec.end});
    }
    for (const JointRecord& rec : joints_) {
      joint_spans.emplace(rec.spec.name(), SourceSpan{rec.begin, rec.end});
    }

    std::vector<LinkSpec> links;
    links.reserve(links_.size());
    for (LinkRecord& rec : links_) links.push_back(std::move(rec.spec));
    std::vector<JointSpec> joints;
    joints.reserve(joints_.size());
    for (JointRecord& rec : joints_) joints.push_back(std::move(rec.spec));

    return UrdfDocument{text_,
                        kin::build_tree(std::move(robot_name),
                                        std::move(links), std::move(joints)),
                        std::move(link_spans), std::move(joint_spans)};
  }

 private:
  void read_link(const xml::Element& el) {
    std::string name = required_attribute(el, "name");
    std::optional<std::string> mesh;

    std::size_t visual_count = 0;
    for (const xml::Element& child : el.children) {
      if (child.name == "visual") {
        ++visual_count;
        if (visual_count > 1) {
          if (strict_) {
            subset_error("link '" + name + "' has more than one <visual>",
                         child.begin);
          }
          continue;  // lenient: first visual wins
        }
        mesh = read_visual(child, name);
      } else if (child.name == "inertial" || child.name == "collision") {
        if (strict_) {
          subset_error("link '" + name + "' contains <" + child.name +
                           ">; inertial and collision terms are omitted",
                       child.begin);
        }
      } else if (strict_) {
        subset_error("unexpected element <" + child.name + "> in link '" +
                         name + "'",
                     child.begin);
      }
    }

    links_.push_back(
        LinkRecord{LinkSpec(std::move(name), std::move(mesh)), el.begin,
                   el.end});
  }

  std::optional<std::string> read_visual(const xml::Element& visual,
                                         const std::string& link_name) {
    const xml::Element* geometry = nullptr;
    for (const xml::Element& child : visual.children) {
      if (child.name == "geometry") {
        if (geometry && strict_) {
          subset_error("link '" + link_name +
                           "' has more than one <geometry>",
                       child.begin);
        }
        if (!geometry) geometry = &child;
      } else if (child.name == "origin" || child.name == "material") {
        // Tolerated in both modes; carries no state in this model.
      } else if (strict_) {
        subset_error("unexpected element <" + child.name + "> in visual of '" +
                         link_name + "'",
                     child.begin);
      }
    }
    if (!geometry) {
      if (strict_) {
        subset_error("visual of link '" + link_name + "' has no <geometry>",
                     visual.begin);
      }
      return std::nullopt;
    }
    const xml::Element* mesh = geometry->first_child("mesh");
    if (!mesh) {
      if (strict_) {
        subset_error("geometry of link '" + link_name +
                         "' must contain exactly one <mesh>",
                     geometry->begin);
      }
      return std::nullopt;  // box/cylinder/sphere primitives: no mesh ref
    }
    if (strict_ && geometry->children.size() != 1) {
      subset_error("geometry of link '" + link_name +
                       "' must contain exactly one <mesh>",
                   geometry->begin);
    }
    return required_attribute(*mesh, "filename");
  }

  void read_joint(const xml::Element& el) {
    std::string name = required_attribute(el, "name");
    std::string type_str = required_attribute(el, "type");

    bool continuous = false;
    JointType type;
    if (type_str == "revolute") {
      type = JointType::kRevolute;
    } else if (type_str == "prismatic") {
      type = JointType::kPrismatic;
    } else if (type_str == "fixed") {
      type = JointType::kFixed;
    } else if (type_str == "continuous" && !strict_) {
      type = JointType::kRevolute;
      continuous = true;
    } else {
      subset_error("joint '" + name + "' has unsupported type '" + type_str +
                       "'",
                   el.begin);
    }

    const xml::Element* parent_el = nullptr;
    const xml::Element* child_el = nullptr;
    const xml::Element* origin_el = nullptr;
    const xml::Element* axis_el = nullptr;
    const xml::Element* limit_el = nullptr;

    for (const xml::Element& child : el.children) {
      const xml::Element** slot = nullptr;
      if (child.name == "parent") slot = &parent_el;
      else if (child.name == "child") slot = &child_el;
      else if (child.name == "origin") slot = &origin_el;
      else if (child.name == "axis") slot = &axis_el;
      else if (child.name == "limit") slot = &limit_el;
      else {
        if (strict_) {
          subset_error("unexpected element <" + child.name + "> in joint '" +
                           name + "'",
                       child.begin);
        }
        continue;  // lenient: dynamics, mimic, calibration, ...
      }
      if (*slot) {
        if (strict_) {
          subset_error("joint '" + name + "' repeats <" + child.name + ">",
                       child.begin);
        }
        continue;  // lenient: first wins
      }
      *slot = &child;
    }

    if (!parent_el) {
      subset_error("joint '" + name + "' has no <parent>", el.begin);
    }
    if (!child_el) {
      subset_error("joint '" + name + "' has no <child>", el.begin);
    }
    std::string parent = required_attribute(*parent_el, "link");
    std::string child_link = required_attribute(*child_el, "link");

    Pose origin = Pose::zero();  // "with a default zero origin"
    if (origin_el) {
      for (const xml::Attribute& attr : origin_el->attributes) {
        if (attr.name == "xyz") {
          origin.xyz = text::parse_vector3(attr.value, attr.pos);
        } else if (attr.name == "rpy") {
          origin.rpy = text::parse_vector3(attr.value, attr.pos);
        } else if (strict_) {
          subset_error("unexpected attribute '" + attr.name +
                           "' on joint origin",
                       attr.pos);
        }
      }
    }

    std::optional<Eigen::Vector3d> axis;
    if (axis_el) {
      if (type == JointType::kFixed) {
        if (strict_) {
          fail_at(errc::bad_axis,
                  "fixed joint '" + name + "' must not have an axis",
                  axis_el->begin);
        }
        // lenient: drop
      } else {
        const xml::Attribute* xyz = axis_el->find_attribute("xyz");
        if (xyz) {
          axis = text::parse_vector3(xyz->value, xyz->pos);
        } else if (strict_) {
          subset_error("axis of joint '" + name + "' is missing 'xyz'",
                       axis_el->begin);
        } else {
          axis = Eigen::Vector3d::UnitX();  // URDF default
        }
      }
    }

    std::optional<JointLimit> limit;
    if (limit_el) {
      if (type == JointType::kFixed) {
        if (strict_) {
          fail_at(errc::bad_limit,
                  "fixed joint '" + name + "' must not have a limit",
                  limit_el->begin);
        }
      } else {
        JointLimit lim;
        for (const xml::Attribute& attr : limit_el->attributes) {
          if (attr.name == "lower") {
            lim.lower = text::parse_double(attr.value, attr.pos);
          } else if (attr.name == "upper") {
            lim.upper = text::parse_double(attr.value, attr.pos);
          } else if (attr.name == "effort" || attr.name == "velocity") {
            if (strict_) {
              subset_error("limit of joint '" + name + "' carries '" +
                               attr.name + "'",
                           attr.pos);
            }
          } else if (strict_) {
            subset_error("unexpected attribute '" + attr.name +
                             "' on joint limit",
                         attr.pos);
          }
        }
        limit = lim;
      }
    }
    if (continuous && !limit) {
      limit = JointLimit{-std::numbers::pi, std::numbers::pi};
    }

    try {
      joints_.push_back(JointRecord{
          JointSpec(std::move(name), type, std::move(parent),
                    std::move(child_link), origin, std::move(axis), limit),
          el.begin, el.end});
    } catch (const Error& e) {
      if (e.position()) throw;
      throw Error(e.code(), e.what(), el.begin);
    }
  }

  // Mirrors build_tree's checks so every diagnostic gets a source position.
  void validate_structure() {
    std::unordered_map<std::string, std::size_t> link_pos;
    for (const LinkRecord& rec : links_) {
      auto [it, inserted] = link_pos.emplace(rec.spec.name(), rec.begin);
      if (!inserted) {
        fail_at(errc::duplicate_link, "link '" + rec.spec.name() + "'",
                rec.begin);
      }
    }
    std::unordered_map<std::string, const JointRecord*> parent_of;
    for (const JointRecord& rec : joints_) {
      for (const std::string* end :
           {&rec.spec.parent(), &rec.spec.child()}) {
        if (!link_pos.count(*end)) {
          fail_at(errc::unknown_link_reference,
                  "joint '" + rec.spec.name() + "' references unknown link '" +
                      *end + "'",
                  rec.begin);
        }
      }
      auto [it, inserted] = parent_of.emplace(rec.spec.child(), &rec);
      if (!inserted) {
        fail_at(errc::multiple_parents,
                "link '" + rec.spec.child() + "' is the child of joints '" +
                    it->second->spec.name() + "' and '" + rec.spec.name() +
                    "'",
                rec.begin);
      }
    }

    std::vector<const LinkRecord*> bases;
    for (const LinkRecord& rec : links_) {
      if (!parent_of.count(rec.spec.name())) bases.push_back(&rec);
    }
    if (bases.empty() && !links_.empty()) {
      const JointRecord* on_cycle = find_cycle_joint(parent_of,
                                                     links_.front().spec.name());
      fail_at(errc::cycle_detected, cycle_path(parent_of, on_cycle->spec.child()),
              on_cycle->begin);
    }
    if (bases.size() > 1) {
      std::unordered_set<std::string> parents;
      for (const JointRecord& rec : joints_) parents.insert(rec.spec.parent());
      for (const LinkRecord* rec : bases) {
        if (!parents.count(rec->spec.name())) {
          fail_at(errc::disconnected_link,
                  "link '" + rec->spec.name() + "' is attached to no joint",
                  rec->begin);
        }
      }
      std::string names;
      for (const LinkRecord* rec : bases) {
        if (!names.empty()) names += ", ";
        names += rec->spec.name();
      }
      fail_at(errc::multiple_base_links, names, bases[1]->begin);
    }
    if (!bases.empty()) {
      std::unordered_set<std::string> reached;
      std::vector<std::string> stack{bases.front()->spec.name()};
      while (!stack.empty()) {
        std::string cur = std::move(stack.back());
        stack.pop_back();
        if (!reached.insert(cur).second) continue;
        for (const JointRecord& rec : joints_) {
          if (rec.spec.parent() == cur) stack.push_back(rec.spec.child());
        }
      }
      for (const LinkRecord& rec : links_) {
        if (!reached.count(rec.spec.name())) {
          const JointRecord* on_cycle =
              find_cycle_joint(parent_of, rec.spec.name());
          fail_at(errc::cycle_detected,
                  cycle_path(parent_of, on_cycle->spec.child()),
                  on_cycle->begin);
        }
      }
    }
  }

  static const JointRecord* find_cycle_joint(
      const std::unordered_map<std::string, const JointRecord*>& parent_of,
      std::string start) {
    std::unordered_set<std::string> seen;
    std::string cur = std::move(start);
    while (seen.insert(cur).second) {
      cur = parent_of.at(cur)->spec.parent();
    }
    return parent_of.at(cur);
  }

  static std::string cycle_path(
      const std::unordered_map<std::string, const JointRecord*>& parent_of,
      std::string start) {
    std::string out = start;
    std::string cur = start;
    do {
      cur = parent_of.at(cur)->spec.parent();
      out += " -> " + cur;
    } while (cur != start);
    return out;
  }

  const std::string& text_;
  bool strict_;
  std::vector<LinkRecord> links_;
  std::vector<JointRecord> joints_;
};

std::string escape_attribute(const std::string& value) {
  std::string out;
  out.reserve(value.size());
  for (char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

UrdfDocument parse_urdf(const std::string& text, Strictness mode) {
  return UrdfReader(text, mode).run();
}

std::string emit_urdf(const kin::KinematicTree& tree) {
  std::string out;
  out += "<robot name=\"" + escape_attribute(tree.robot_name()) + "\">\n";
  for (const kin::LinkSpec& link : tree.links()) {
    if (link.is_virtual()) {
      out += "  <link name=\"" + escape_attribute(link.name()) + "\"/>\n";
      continue;
    }
    out += "  <link name=\"" + escape_attribute(link.name()) + "\">\n";
    out += "    <visual>\n";
    out += "      <geometry>\n";
    out += "        <mesh filename=\"" + escape_attribute(*link.mesh()) +
           "\"/>\n";
    out += "      </geometry>\n";
    out += "    </visual>\n";
    out += "  </link>\n";
  }
  for (const kin::JointSpec& joint : tree.joints()) {
    out += "  <joint name=\"" + escape_attribute(joint.name()) + "\" type=\"" +
           std::string(kin::to_string(joint.type())) + "\">\n";
    out += "    <parent link=\"" + escape_attribute(joint.parent()) + "\"/>\n";
    out += "    <child link=\"" + escape_attribute(joint.child()) + "\"/>\n";
    out += "    <origin xyz=\"" + text::format_vector3(joint.origin().xyz) +
           "\" rpy=\"" + text::format_vector3(joint.origin().rpy) + "\"/>\n";
    if (joint.movable()) {
      out += "    <axis xyz=\"" + text::format_vector3(*joint.axis()) +
             "\"/>\n";
      out += "    <limit lower=\"" + text::format_double(joint.limit()->lower) +
             "\" upper=\"" + text::format_double(joint.limit()->upper) +
             "\"/>\n";
    }
    out += "  </joint>\n";
  }
  out += "</robot>\n";
  return out;
}

bool tree_equal(const kin::KinematicTree& a, const kin::KinematicTree& b,
                double tol) {
  if (a.robot_name() != b.robot_name()) return false;
  if (a.links().size() != b.links().size()) return false;
  if (a.joints().size() != b.joints().size()) return false;

  auto link_key = [](const kin::LinkSpec& link) {
    return std::make_tuple(link.name(), link.mesh().value_or(""),
                           link.is_virtual());
  };
  std::multiset<std::tuple<std::string, std::string, bool>> la, lb;
  for (const auto& link : a.links()) la.insert(link_key(link));
  for (const auto& link : b.links()) lb.insert(link_key(link));
  if (la != lb) return false;

  auto joint_map = [](const kin::KinematicTree& t) {
    std::map<std::pair<std::string, std::string>, const kin::JointSpec*> m;
    for (const auto& joint : t.joints()) {
      m.emplace(std::make_pair(joint.parent(), joint.child()), &joint);
    }
    return m;
  };
  auto ja = joint_map(a);
  auto jb = joint_map(b);
  if (ja.size() != jb.size()) return false;

  auto close = [tol](double x, double y) { return std::abs(x - y) <= tol; };

  for (const auto& [key, pa] : ja) {
    auto it = jb.find(key);
    if (it == jb.end()) return false;
    const kin::JointSpec* pb = it->second;
    if (pa->type() != pb->type()) return false;
    for (int i = 0; i < 3; ++i) {
      if (!close(pa->origin().xyz[i], pb->origin().xyz[i])) return false;
      if (!close(pa->origin().rpy[i], pb->origin().rpy[i])) return false;
    }
    if (pa->movable()) {
      auto ca = kin::canonicalize_axis(*pa->axis(), pa->limit());
      auto cb = kin::canonicalize_axis(*pb->axis(), pb->limit());
      for (int i = 0; i < 3; ++i) {
        if (!close(ca.axis[i], cb.axis[i])) return false;
      }
      if (!close(ca.limit->lower, cb.limit->lower)) return false;
      if (!close(ca.limit->upper, cb.limit->upper)) return false;
    }
  }
  return true;
}

}  // namespace artic::urdf
