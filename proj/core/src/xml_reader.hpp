#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace artic::xml {

// Minimal non-validating XML reader used by the URDF layer. Keeps byte
// offsets for every element and attribute so diagnostics can point at the
// source. Comments, processing instructions, DOCTYPE, CDATA and text
// content are skipped; namespace prefixes are stripped; the five standard
// entities plus numeric character references are decoded in attribute
// values.

struct Attribute {
  std::string name;
  std::string value;
  std::size_t pos = 0;  // byte offset of the attribute name
};

struct Element {
  std::string name;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::size_t begin = 0;  // offset of '<'
  std::size_t end = 0;    // one past the closing '>'

  const Attribute* find_attribute(std::string_view attr_name) const;
  const Element* first_child(std::string_view child_name) const;
  std::size_t count_children(std::string_view child_name) const;
};

/// Parses a document with a single root element. Throws
/// Error(errc::xml_malformed, ..., position) on any syntax problem.
Element parse(const std::string& text);

/// Repair support: when `text` fails to parse only because the input ended
/// with elements still open, returns the innermost open element name.
std::optional<std::string> unclosed_final_tag(const std::string& text);

}  // namespace artic::xml
