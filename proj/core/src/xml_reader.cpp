#include "xml_reader.hpp"

#include <cctype>

#include "artic/error.hpp"

namespace artic::xml {

namespace {

constexpr int kMaxDepth = 256;

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
}

bool is_name_char(char c) {
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) ||
         c == '-' || c == '.';
}

std::string strip_prefix(std::string name) {
  auto colon = name.find(':');
  if (colon != std::string::npos) name.erase(0, colon + 1);
  return name;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Element run() {
    skip_bom();
    skip_misc();
    if (eof()) err("expected a root element");
    Element root = element(0);
    skip_misc();
    if (!eof()) err("content after root element");
    return root;
  }

  const std::vector<std::string>& open_stack() const { return open_; }
  bool stopped_at_content_eof() const { return content_eof_; }

 private:
  [[noreturn]] void err(const std::string& message) const {
    fail_at(errc::xml_malformed, message, pos_);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const {
    return text_.compare(pos_, s.size(), s) == 0;
  }

  void skip_bom() {
    if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  void skip_until(std::string_view terminator, const char* what) {
    auto found = text_.find(terminator, pos_);
    if (found == std::string::npos) err(std::string("unterminated ") + what);
    pos_ = found + terminator.size();
  }

  // Whitespace, comments, PIs, DOCTYPE, stray text -- everything that is not
  // an element tag.
  void skip_misc() {
    while (!eof()) {
      if (peek() != '<') {
        ++pos_;
        continue;
      }
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<![CDATA[")) {
        skip_until("]]>", "CDATA section");
      } else if (starts_with("<!")) {
        skip_until(">", "declaration");
      } else {
        return;
      }
    }
  }

  std::string name_token() {
    if (eof() || !is_name_start(peek())) err("expected a name");
    std::size_t start = pos_;
    while (!eof() && is_name_char(peek())) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::string decode_entities(std::string_view raw, std::size_t at) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) {
        fail_at(errc::xml_malformed, "unterminated entity reference", at + i);
      }
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (!ent.empty() && ent[0] == '#') {
        int base = 10;
        std::string_view digits = ent.substr(1);
        if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
          base = 16;
          digits = digits.substr(1);
        }
        unsigned long code = 0;
        try {
          code = std::stoul(std::string(digits), nullptr, base);
        } catch (const std::exception&) {
          fail_at(errc::xml_malformed, "bad character reference", at + i);
        }
        if (code == 0 || code > 0x10FFFF) {
          fail_at(errc::xml_malformed, "bad character reference", at + i);
        }
        // Encode as UTF-8.
        if (code < 0x80) {
          out += static_cast<char>(code);
        } else if (code < 0x800) {
          out += static_cast<char>(0xC0 | (code >> 6));
          out += static_cast<char>(0x80 | (code & 0x3F));
        } else if (code < 0x10000) {
          out += static_cast<char>(0xE0 | (code >> 12));
          out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (code & 0x3F));
        } else {
          out += static_cast<char>(0xF0 | (code >> 18));
          out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
          out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
          out += static_cast<char>(0x80 | (code & 0x3F));
        }
      } else {
        fail_at(errc::xml_malformed,
                "unknown entity '&" + std::string(ent) + ";'", at + i);
      }
      i = semi;
    }
    return out;
  }

  Element element(int depth) {
    if (depth > kMaxDepth) err("element nesting too deep");
    Element el;
    el.begin = pos_;
    ++pos_;  // consume '<'
    std::string raw_name = name_token();
    el.name = strip_prefix(raw_name);

    // Attributes.
    while (true) {
      skip_ws();
      if (eof()) err("unexpected end of input inside tag");
      char c = peek();
      if (c == '>' || c == '/') break;
      Attribute attr;
      attr.pos = pos_;
      std::string raw_attr = name_token();
      skip_ws();
      if (eof() || peek() != '=') err("expected '=' after attribute name");
      ++pos_;
      skip_ws();
      if (eof() || (peek() != '"' && peek() != '\'')) {
        err("expected a quoted attribute value");
      }
      char quote = peek();
      ++pos_;
      std::size_t vstart = pos_;
      auto vend = text_.find(quote, pos_);
      if (vend == std::string::npos) err("unterminated attribute value");
      attr.value = decode_entities(
          std::string_view(text_).substr(vstart, vend - vstart), vstart);
      pos_ = vend + 1;
      if (raw_attr == "xmlns" || raw_attr.rfind("xmlns:", 0) == 0) continue;
      attr.name = strip_prefix(std::move(raw_attr));
      el.attributes.push_back(std::move(attr));
    }

    if (peek() == '/') {
      ++pos_;
      if (eof() || peek() != '>') err("expected '>' after '/'");
      ++pos_;
      el.end = pos_;
      return el;
    }
    ++pos_;  // consume '>'

    open_.push_back(el.name);
    while (true) {
      // Scan content until the next tag.
      while (!eof() && peek() != '<') ++pos_;
      if (eof()) {
        content_eof_ = true;
        err("unexpected end of input inside element '" + el.name + "'");
      }
      if (starts_with("<!--")) {
        skip_until("-->", "comment");
        continue;
      }
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
        continue;
      }
      if (starts_with("<![CDATA[")) {
        skip_until("]]>", "CDATA section");
        continue;
      }
      if (starts_with("<!")) {
        skip_until(">", "declaration");
        continue;
      }
      if (starts_with("</")) {
        std::size_t close_pos = pos_;
        pos_ += 2;
        std::string close_name = strip_prefix(name_token());
        skip_ws();
        if (eof() || peek() != '>') err("expected '>' in closing tag");
        ++pos_;
        if (close_name != el.name) {
          fail_at(errc::xml_malformed,
                  "closing tag '</" + close_name + ">' does not match '<" +
                      el.name + ">'",
                  close_pos);
        }
        open_.pop_back();
        el.end = pos_;
        return el;
      }
      el.children.push_back(element(depth + 1));
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::vector<std::string> open_;
  bool content_eof_ = false;
};

}  // namespace

const Attribute* Element::find_attribute(std::string_view attr_name) const {
  for (const Attribute& attr : attributes) {
    if (attr.name == attr_name) return &attr;
  }
  return nullptr;
}

const Element* Element::first_child(std::string_view child_name) const {
  for (const Element& child : children) {
    if (child.name == child_name) return &child;
  }
  return nullptr;
}

std::size_t Element::count_children(std::string_view child_name) const {
  std::size_t n = 0;
  for (const Element& child : children) {
    if (child.name == child_name) ++n;
  }
  return n;
}

Element parse(const std::string& text) { return Parser(text).run(); }

std::optional<std::string> unclosed_final_tag(const std::string& text) {
  Parser parser(text);
  try {
    parser.run();
  } catch (const Error& e) {
    if (e.code() == errc::xml_malformed && parser.stopped_at_content_eof() &&
        !parser.open_stack().empty()) {
      return parser.open_stack().back();
    }
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace artic::xml
