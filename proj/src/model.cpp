#include "cmcq/model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>

#include "cmcq/error.hpp"

namespace cmcq {

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::None: return "none";
    case Axis::Child: return "child";
    case Axis::Descendant: return "descendant";
  }
  return "?";
}

NodeTest NodeTest::constant_label(std::string value) {
  return NodeTest{Kind::Constant, std::move(value), {}};
}

NodeTest NodeTest::variable_label(std::string name) {
  return NodeTest{Kind::Variable, {}, std::move(name)};
}

NodeTest NodeTest::both(std::string value, std::string name) {
  return NodeTest{Kind::Both, std::move(value), std::move(name)};
}

namespace {

enum class Tok { Name, String, LParen, RParen, Comma, Semi, LBracket, RBracket, Slash, DSlash, Colon, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, "", line_, col_});
        return out;
      }
      const std::size_t line = line_, col = col_;
      const char c = text_[pos_];
      auto single = [&](Tok t) {
        advance();
        out.push_back({t, std::string(1, c), line, col});
      };
      switch (c) {
        case '(': single(Tok::LParen); continue;
        case ')': single(Tok::RParen); continue;
        case ',': single(Tok::Comma); continue;
        case ';': single(Tok::Semi); continue;
        case '[': single(Tok::LBracket); continue;
        case ']': single(Tok::RBracket); continue;
        case ':': single(Tok::Colon); continue;
        case '/':
          advance();
          if (pos_ < text_.size() && text_[pos_] == '/') {
            advance();
            out.push_back({Tok::DSlash, "//", line, col});
          } else {
            out.push_back({Tok::Slash, "/", line, col});
          }
          continue;
        case '"': out.push_back({Tok::String, read_string(line, col), line, col}); continue;
        default: break;
      }
      if (is_name_start(c)) {
        std::string name;
        while (pos_ < text_.size() && is_name_char(text_[pos_])) {
          name.push_back(text_[pos_]);
          advance();
        }
        out.push_back({Tok::Name, std::move(name), line, col});
        continue;
      }
      throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string read_string(std::size_t line, std::size_t col) {
    advance();  // opening quote
    std::string value;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
        advance();
      }
      value.push_back(text_[pos_]);
      advance();
    }
    if (pos_ >= text_.size()) throw SyntaxError("unterminated string", line, col);
    advance();  // closing quote
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::Name: return "name";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Slash: return "'/'";
    case Tok::DSlash: return "'//'";
    case Tok::Colon: return "':'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Query run() {
    Query q;
    while (is_keyword("REL") || is_keyword("TREE")) {
      if (is_keyword("REL")) {
        q.relations.push_back(relation());
      } else {
        q.trees.push_back(tree());
      }
    }
    if (q.relations.empty() && q.trees.empty()) fail("expected REL or TREE statement");
    expect_keyword("RETURN");
    q.return_vars = varlist();
    if (peek().kind == Tok::Semi) next();
    if (peek().kind != Tok::End) fail("unexpected trailing input");

    std::set<std::string> names;
    for (const auto& r : q.relations) {
      if (!names.insert(r.name).second) throw DuplicateName("duplicate atom name '" + r.name + "'");
    }
    for (const auto& t : q.trees) {
      if (!names.insert(t.name).second) throw DuplicateName("duplicate atom name '" + t.name + "'");
    }
    return q;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    throw SyntaxError(what + ", found " + std::string(describe(t.kind)) +
                          (t.text.empty() ? "" : " '" + t.text + "'"),
                      t.line, t.column);
  }

  bool is_keyword(std::string_view kw) const { return peek().kind == Tok::Name && peek().text == kw; }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) fail("expected " + std::string(kw));
    next();
  }

  const Token& expect(Tok kind) {
    if (peek().kind != kind) fail("expected " + std::string(describe(kind)));
    return next();
  }

  std::vector<std::string> varlist() {
    std::vector<std::string> vars{expect(Tok::Name).text};
    while (peek().kind == Tok::Comma) {
      next();
      vars.push_back(expect(Tok::Name).text);
    }
    return vars;
  }

  RelationAtom relation() {
    expect_keyword("REL");
    RelationAtom r;
    r.name = expect(Tok::Name).text;
    expect(Tok::LParen);
    r.attributes = varlist();
    expect(Tok::RParen);
    expect_keyword("FROM");
    r.source = expect(Tok::String).text;
    expect(Tok::Semi);
    return r;
  }

  TreeAtom tree() {
    expect_keyword("TREE");
    TreeAtom t;
    t.name = expect(Tok::Name).text;
    expect_keyword("FROM");
    t.source = expect(Tok::String).text;
    expect_keyword("MATCH");
    t.pattern = step(Axis::None);
    expect(Tok::Semi);
    return t;
  }

  NodeTest test() {
    if (peek().kind == Tok::Colon) {
      next();
      return NodeTest::variable_label(expect(Tok::Name).text);
    }
    if (peek().kind != Tok::Name && peek().kind != Tok::String) fail("expected node test");
    std::string label = next().text;
    if (peek().kind == Tok::Colon) {
      next();
      return NodeTest::both(std::move(label), expect(Tok::Name).text);
    }
    return NodeTest::constant_label(std::move(label));
  }

  PatternNode step(Axis axis) {
    PatternNode node;
    node.id = next_id_++;
    node.axis = axis;
    node.test = test();
    while (peek().kind == Tok::LBracket) {
      next();
      Axis child_axis = Axis::Child;
      if (peek().kind == Tok::DSlash) {
        next();
        child_axis = Axis::Descendant;
      }
      node.children.push_back(step(child_axis));
      expect(Tok::RBracket);
    }
    if (peek().kind == Tok::Slash || peek().kind == Tok::DSlash) {
      const Axis child_axis = next().kind == Tok::Slash ? Axis::Child : Axis::Descendant;
      node.children.push_back(step(child_axis));
    }
    return node;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  NodeId next_id_ = 0;
};

bool is_plain_name(std::string_view s) {
  if (s.empty() || !is_name_start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), is_name_char);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string print_test(const NodeTest& t) {
  auto label = [](const std::string& s) { return is_plain_name(s) ? s : quote(s); };
  switch (t.kind) {
    case NodeTest::Kind::Constant: return label(t.constant);
    case NodeTest::Kind::Variable: return ":" + t.variable;
    case NodeTest::Kind::Both: return label(t.constant) + ":" + t.variable;
  }
  return {};
}

void print_step(const PatternNode& n, std::string& out) {
  out += print_test(n.test);
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const PatternNode& c = n.children[i];
    const bool last = i + 1 == n.children.size();
    if (last) {
      out += c.axis == Axis::Descendant ? "//" : "/";
      print_step(c, out);
    } else {
      out += c.axis == Axis::Descendant ? "[//" : "[";
      print_step(c, out);
      out += "]";
    }
  }
}

void join_names(const std::vector<std::string>& names, std::string& out) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
}

void collect_paths(const PatternNode& n, PatternPath& prefix, std::vector<PatternPath>& out) {
  prefix.nodes.push_back({n.id, n.test});
  if (n.children.empty()) {
    out.push_back(prefix);
  } else {
    for (const auto& c : n.children) {
      prefix.axes.push_back(c.axis);
      collect_paths(c, prefix, out);
      prefix.axes.pop_back();
    }
  }
  prefix.nodes.pop_back();
}

}  // namespace

Query parse_query(std::string_view text) {
  return Parser(Lexer(text).run()).run();
}

std::string print_pattern(const PatternNode& root) {
  std::string out;
  print_step(root, out);
  return out;
}

std::string print_query(const Query& query) {
  // Only pattern nodes consume ids, so emitting relations first keeps ids stable.
  std::string out;
  for (const auto& r : query.relations) {
    out += "REL " + r.name + "(";
    join_names(r.attributes, out);
    out += ") FROM " + quote(r.source) + ";\n";
  }
  for (const auto& t : query.trees) {
    out += "TREE " + t.name + " FROM " + quote(t.source) + " MATCH " + print_pattern(t.pattern) + ";\n";
  }
  out += "RETURN ";
  join_names(query.return_vars, out);
  out += ";\n";
  return out;
}

int ValidatedQuery::variable_id(std::string_view name) const {
  auto it = std::find(variables_.begin(), variables_.end(), name);
  return it == variables_.end() ? -1 : static_cast<int>(it - variables_.begin());
}

ValidatedQuery validate(Query q) {
  ValidatedQuery v;
  std::unordered_map<std::string, int> ids;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.emplace(name, static_cast<int>(v.variables_.size()));
    if (inserted) {
      v.variables_.push_back(name);
      v.occurrences_.emplace_back();
    }
    return it->second;
  };

  for (std::size_t r = 0; r < q.relations.size(); ++r) {
    const auto& attrs = q.relations[r].attributes;
    for (std::size_t c = 0; c < attrs.size(); ++c) {
      v.occurrences_[intern(attrs[c])].push_back(
          {VariableOccurrence::Kind::RelationColumn, static_cast<int>(r), static_cast<int>(c)});
    }
  }
  std::map<int, NodeId> first_node;
  for (std::size_t t = 0; t < q.trees.size(); ++t) {
    for_each_node(q.trees[t].pattern, [&](const PatternNode& n) {
      if (!n.test.has_variable()) return;
      const int id = intern(n.test.variable);
      v.occurrences_[id].push_back({VariableOccurrence::Kind::PatternNode, static_cast<int>(t), n.id});
      auto [it, inserted] = first_node.emplace(id, n.id);
      if (!inserted) v.label_equalities_.emplace_back(it->second, n.id);
    });
  }

  if (q.return_vars.empty()) throw EmptyReturn("query has an empty return list");
  for (const auto& r : q.return_vars) {
    if (!ids.contains(r)) throw UnboundReturnVariable("return variable '" + r + "' is not bound by any atom");
  }
  v.query_ = std::move(q);
  return v;
}

bool is_merge_root(const PatternNode& node) {
  return node.test.kind == NodeTest::Kind::Variable && node.test.variable == kMergeRootVariable;
}

PatternNode merge_patterns(std::vector<PatternNode> patterns) {
  if (patterns.size() == 1) return std::move(patterns.front());
  PatternNode root;
  root.test = NodeTest::variable_label(std::string(kMergeRootVariable));
  NodeId top = -1;
  for (const auto& p : patterns) top = std::max(top, max_node_id(p));
  root.id = top + 1;
  for (auto& p : patterns) {
    p.axis = Axis::Descendant;
    root.children.push_back(std::move(p));
  }
  return root;
}

std::vector<PatternPath> root_to_leaf_paths(const PatternNode& root) {
  std::vector<PatternPath> out;
  PatternPath prefix;
  collect_paths(root, prefix, out);
  return out;
}

std::set<NodeId> branch_nodes(const PatternNode& root) {
  std::set<NodeId> out;
  for_each_node(root, [&](const PatternNode& n) {
    if (n.children.size() >= 2) out.insert(n.id);
  });
  return out;
}

void for_each_node(const PatternNode& root, const std::function<void(const PatternNode&)>& fn) {
  fn(root);
  for (const auto& c : root.children) for_each_node(c, fn);
}

namespace {
void visit_with_parent(const PatternNode& n, const PatternNode* parent,
                       const std::function<void(const PatternNode&, const PatternNode*)>& fn) {
  fn(n, parent);
  for (const auto& c : n.children) visit_with_parent(c, &n, fn);
}
}  // namespace

void for_each_node_with_parent(const PatternNode& root,
                               const std::function<void(const PatternNode&, const PatternNode*)>& fn) {
  visit_with_parent(root, nullptr, fn);
}

std::size_t node_count(const PatternNode& root) {
  std::size_t n = 0;
  for_each_node(root, [&](const PatternNode&) { ++n; });
  return n;
}

NodeId max_node_id(const PatternNode& root) {
  NodeId m = root.id;
  for_each_node(root, [&](const PatternNode& n) { m = std::max(m, n.id); });
  return m;
}

const PatternNode* find_node(const PatternNode& root, NodeId id) {
  if (root.id == id) return &root;
  for (const auto& c : root.children) {
    if (const PatternNode* hit = find_node(c, id)) return hit;
  }
  return nullptr;
}

PatternNode* find_node(PatternNode& root, NodeId id) {
  return const_cast<PatternNode*>(find_node(static_cast<const PatternNode&>(root), id));
}

}  // namespace cmcq
