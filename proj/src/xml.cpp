// Minimal XML reader: elements, attributes, character data, entity and
// character references, comments, CDATA, and skipped prolog constructs.
// Namespaces are not interpreted; prefixed names are kept verbatim.

#include <cctype>
#include <optional>
#include <set>

#include "cmcq/error.hpp"
#include "cmcq/ingest.hpp"
#include "detail.hpp"

namespace cmcq {
namespace {

bool is_name_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == ':' || c >= 0x80; }
bool is_name_char(unsigned char c) {
  return is_name_start(c) || std::isdigit(c) || c == '-' || c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class XmlReader {
 public:
  explicit XmlReader(std::string_view text) : s_(text) {}

  LabeledTree parse() {
    skip_misc();
    if (!peek_is("<") || peek_is("</")) fail("expected root element");
    element(std::nullopt);
    skip_misc();
    if (pos_ != s_.size()) fail("content after the root element");
    return std::move(tree_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw MalformedDocument("xml offset " + std::to_string(pos_) + ": " + what);
  }

  bool peek_is(std::string_view lit) const { return s_.substr(pos_, lit.size()) == lit; }

  void expect(std::string_view lit) {
    if (!peek_is(lit)) fail("expected '" + std::string(lit) + "'");
    pos_ += lit.size();
  }

  void skip_until(std::string_view terminator) {
    auto end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) fail("unterminated construct");
    pos_ = end + terminator.size();
  }

  void skip_space() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  // Whitespace, comments, processing instructions and DOCTYPE around the root.
  void skip_misc() {
    for (;;) {
      skip_space();
      if (peek_is("<!--")) {
        skip_until("-->");
      } else if (peek_is("<?")) {
        skip_until("?>");
      } else if (peek_is("<!DOCTYPE")) {
        skip_doctype();
      } else {
        return;
      }
    }
  }

  void skip_doctype() {
    int depth = 0;
    for (; pos_ < s_.size(); ++pos_) {
      if (s_[pos_] == '[') ++depth;
      if (s_[pos_] == ']') --depth;
      if (s_[pos_] == '>' && depth == 0) {
        ++pos_;
        return;
      }
    }
    fail("unterminated DOCTYPE");
  }

  std::string name() {
    const std::size_t start = pos_;
    if (pos_ >= s_.size() || !is_name_start(static_cast<unsigned char>(s_[pos_]))) fail("expected a name");
    while (pos_ < s_.size() && is_name_char(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  void reference(std::string& out) {
    expect("&");
    auto end = s_.find(';', pos_);
    if (end == std::string_view::npos) fail("unterminated reference");
    std::string_view ref = s_.substr(pos_, end - pos_);
    pos_ = end + 1;
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (ref.size() > 1 && ref[0] == '#') {
      const bool hex = ref[1] == 'x' || ref[1] == 'X';
      std::string digits(ref.substr(hex ? 2 : 1));
      if (digits.empty()) fail("empty character reference");
      std::size_t used = 0;
      unsigned long cp = 0;
      try {
        cp = std::stoul(digits, &used, hex ? 16 : 10);
      } catch (const std::exception&) {
        fail("bad character reference");
      }
      if (used != digits.size() || cp > 0x10FFFF) fail("bad character reference");
      append_utf8(out, cp);
    } else {
      fail("unknown entity &" + std::string(ref) + ";");
    }
  }

  std::string attribute_value() {
    if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) fail("expected quoted attribute value");
    const char quote = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      if (s_[pos_] == '<') fail("'<' in attribute value");
      if (s_[pos_] == '&') reference(out);
      else out += s_[pos_++];
    }
    expect(std::string_view(&quote, 1));
    return out;
  }

  void flush_text(std::size_t node, std::string& text) {
    auto t = trim(text);
    if (!t.empty()) tree_.add_child(node, std::string(t));
    text.clear();
  }

  void element(std::optional<std::size_t> parent) {
    expect("<");
    const std::string tag = name();
    const std::size_t node = parent ? tree_.add_child(*parent, tag) : tree_.add_root(tag);

    std::set<std::string> seen;
    for (;;) {
      skip_space();
      if (peek_is("/>")) {
        pos_ += 2;
        return;
      }
      if (peek_is(">")) {
        ++pos_;
        break;
      }
      std::string attr = name();
      if (!seen.insert(attr).second) fail("duplicate attribute " + attr);
      skip_space();
      expect("=");
      skip_space();
      std::string value = attribute_value();
      const std::size_t a = tree_.add_child(node, "@" + attr);
      tree_.add_child(a, std::move(value));
    }

    std::string text;
    for (;;) {
      if (pos_ >= s_.size()) fail("unclosed element <" + tag + ">");
      if (peek_is("</")) {
        flush_text(node, text);
        pos_ += 2;
        if (name() != tag) fail("mismatched closing tag for <" + tag + ">");
        skip_space();
        expect(">");
        return;
      }
      if (peek_is("<!--")) {
        // A comment separates text runs, as the serializer relies on.
        flush_text(node, text);
        skip_until("-->");
      } else if (peek_is("<![CDATA[")) {
        pos_ += 9;
        auto end = s_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA");
        text.append(s_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (peek_is("<?")) {
        skip_until("?>");
      } else if (s_[pos_] == '<') {
        flush_text(node, text);
        element(node);
      } else if (s_[pos_] == '&') {
        reference(text);
      } else {
        text += s_[pos_++];
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  LabeledTree tree_;
};

bool is_xml_name(std::string_view s) {
  if (s.empty() || !is_name_start(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!is_name_char(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

bool is_attribute_node(const LabeledTree& t, std::size_t n) {
  const auto& node = t.nodes[n];
  return node.label.size() > 1 && node.label[0] == '@' && is_xml_name(std::string_view(node.label).substr(1)) &&
         node.children.size() == 1 && t.nodes[node.children[0]].children.empty();
}

void write_node(const LabeledTree& t, std::size_t n, std::string& out) {
  const auto& node = t.nodes[n];
  if (!is_xml_name(node.label)) {
    if (!node.children.empty() || trim(node.label) != node.label || node.label.empty())
      throw UnsupportedKind("label '" + node.label + "' cannot be written as XML");
    out += escape_xml(node.label);
    return;
  }
  out += '<';
  out += node.label;
  std::size_t first_content = 0;
  std::set<std::string_view> attrs;
  for (; first_content < node.children.size() && is_attribute_node(t, node.children[first_content]);
       ++first_content) {
    const auto& a = t.nodes[node.children[first_content]];
    if (!attrs.insert(a.label).second) break;
    out += ' ';
    out += std::string_view(a.label).substr(1);
    out += "=\"";
    out += escape_xml(t.nodes[a.children[0]].label);
    out += '"';
  }
  if (first_content == node.children.size()) {
    out += "/>";
    return;
  }
  out += '>';
  bool previous_text = false;
  for (std::size_t i = first_content; i < node.children.size(); ++i) {
    const bool text = !is_xml_name(t.nodes[node.children[i]].label);
    if (text && previous_text) out += "<!---->";
    write_node(t, node.children[i], out);
    previous_text = text;
  }
  out += "</";
  out += node.label;
  out += '>';
}

}  // namespace

LabeledTree parse_tree_xml(std::string_view text) { return XmlReader(text).parse(); }

LabeledTree load_tree_xml(const std::filesystem::path& path) { return parse_tree_xml(detail::read_file(path)); }

std::string tree_to_xml(const LabeledTree& tree) {
  if (tree.empty()) throw UnsupportedKind("an empty tree has no XML form");
  if (!is_xml_name(tree.nodes[0].label)) throw UnsupportedKind("root label is not an XML name");
  std::string out;
  write_node(tree, 0, out);
  out += '\n';
  return out;
}

}  // namespace cmcq
