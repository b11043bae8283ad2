#pragma once

// Abstract syntax of cross-model conjunctive queries (relations joined with
// tree patterns through shared label variables), the textual query language,
// validation, and pattern-structure utilities.

#include <compare>
#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cmcq {

using NodeId = int;

enum class Axis { None, Child, Descendant };

std::string_view to_string(Axis axis);

// Label test of a pattern node.
struct NodeTest {
  enum class Kind { Constant, Variable, Both };

  Kind kind = Kind::Variable;
  std::string constant;  // meaningful for Constant and Both
  std::string variable;  // meaningful for Variable and Both

  static NodeTest constant_label(std::string value);
  static NodeTest variable_label(std::string name);
  static NodeTest both(std::string value, std::string name);

  bool has_constant() const noexcept { return kind != Kind::Variable; }
  bool has_variable() const noexcept { return kind != Kind::Constant; }

  bool operator==(const NodeTest&) const = default;
};

struct PatternNode {
  NodeId id = 0;
  NodeTest test;
  Axis axis = Axis::None;  // axis to the parent; None only at the root
  std::vector<PatternNode> children;

  bool operator==(const PatternNode&) const = default;
};

struct RelationAtom {
  std::string name;
  std::vector<std::string> attributes;  // variables, positional
  std::string source;

  bool operator==(const RelationAtom&) const = default;
};

struct TreeAtom {
  std::string name;
  std::string source;
  PatternNode pattern;

  bool operator==(const TreeAtom&) const = default;
};

struct Query {
  std::vector<RelationAtom> relations;
  std::vector<TreeAtom> trees;
  std::vector<std::string> return_vars;

  bool operator==(const Query&) const = default;
};

// Root-to-leaf path of a pattern. axes[i] links nodes[i] to nodes[i + 1].
struct PatternPath {
  struct Step {
    NodeId id;
    NodeTest test;
    bool operator==(const Step&) const = default;
  };
  std::vector<Step> nodes;
  std::vector<Axis> axes;

  bool operator==(const PatternPath&) const = default;
};

/// Parses the textual query language:
///
///   query   := stmt+ "RETURN" varlist ";"?
///   stmt    := "REL" NAME "(" varlist ")" "FROM" STRING ";"
///            | "TREE" NAME "FROM" STRING "MATCH" step ";"
///   step    := test pred* (("/" | "//") step)?
///   pred    := "[" "//"? step "]"
///   test    := label | ":" NAME | label ":" NAME
///   label   := NAME | STRING
///
/// `#` starts a line comment. Pattern node ids are assigned in pre-order,
/// continuing across TREE statements. Throws SyntaxError or DuplicateName.
Query parse_query(std::string_view text);

std::string print_pattern(const PatternNode& root);
std::string print_query(const Query& query);

// Where a variable occurs: a relation column or a pattern node.
struct VariableOccurrence {
  enum class Kind { RelationColumn, PatternNode };
  Kind kind;
  int atom;   // index into Query::relations or Query::trees
  int place;  // column index, or pattern node id
};

class ValidatedQuery {
 public:
  const Query& query() const noexcept { return query_; }

  // Variables in order of first occurrence (relations, then patterns).
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  int variable_id(std::string_view name) const;  // -1 when absent
  const std::vector<VariableOccurrence>& occurrences(int variable) const {
    return occurrences_.at(static_cast<std::size_t>(variable));
  }

  // Pairs of pattern nodes bound to the same variable; their labels must agree.
  const std::vector<std::pair<NodeId, NodeId>>& label_equalities() const noexcept {
    return label_equalities_;
  }

 private:
  friend ValidatedQuery validate(Query q);

  Query query_;
  std::vector<std::string> variables_;
  std::vector<std::vector<VariableOccurrence>> occurrences_;
  std::vector<std::pair<NodeId, NodeId>> label_equalities_;
};

/// Throws EmptyReturn or UnboundReturnVariable.
ValidatedQuery validate(Query q);

// Variable name carried by the synthetic root created by merge_patterns.
inline constexpr std::string_view kMergeRootVariable = "#merge";

bool is_merge_root(const PatternNode& node);

// One pattern is returned unchanged. Several are hung below a fresh root
// (variable kMergeRootVariable, id larger than every input id) through
// descendant edges.
PatternNode merge_patterns(std::vector<PatternNode> patterns);

std::vector<PatternPath> root_to_leaf_paths(const PatternNode& root);

// Ids of nodes with at least two children.
std::set<NodeId> branch_nodes(const PatternNode& root);

// Pre-order traversal helpers.
void for_each_node(const PatternNode& root, const std::function<void(const PatternNode&)>& fn);
void for_each_node_with_parent(
    const PatternNode& root,
    const std::function<void(const PatternNode&, const PatternNode* parent)>& fn);
std::size_t node_count(const PatternNode& root);
NodeId max_node_id(const PatternNode& root);
const PatternNode* find_node(const PatternNode& root, NodeId id);
PatternNode* find_node(PatternNode& root, NodeId id);

}  // namespace cmcq
