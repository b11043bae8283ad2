#pragma once

// Data ingestion: CSV relations, XML/JSON documents as labeled trees, Dewey
// encoding, node tables, value dictionaries and trie indexes.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmcq/model.hpp"

namespace cmcq {

// Canonical scalar text. Equality is byte equality.
using Value = std::string;

class Dewey {
 public:
  Dewey() = default;
  explicit Dewey(std::vector<std::uint32_t> components) : components_(std::move(components)) {}

  const std::vector<std::uint32_t>& components() const noexcept { return components_; }
  std::size_t depth() const noexcept { return components_.size(); }
  bool is_prefix_of(const Dewey& other) const noexcept;
  Dewey child(std::uint32_t sibling_index) const;
  std::string to_string() const;  // "0.2.1"

  // Component-lexicographic; a prefix sorts before its extensions.
  auto operator<=>(const Dewey&) const = default;

 private:
  std::vector<std::uint32_t> components_;
};

// Child: p is the immediate prefix of q. Descendant: p is a proper prefix of q.
bool axis_test(const Dewey& p, const Dewey& q, Axis axis);

// Ordered labeled tree as produced by the loaders. nodes[0] is the root.
struct LabeledTree {
  struct Node {
    Value label;
    std::vector<std::size_t> children;
  };
  std::vector<Node> nodes;

  std::size_t add_root(Value label);
  std::size_t add_child(std::size_t parent, Value label);
  bool empty() const noexcept { return nodes.empty(); }
};

LabeledTree load_tree_xml(const std::filesystem::path& path);
LabeledTree load_tree_json(const std::filesystem::path& path);
LabeledTree parse_tree_xml(std::string_view text);
LabeledTree parse_tree_json(std::string_view text);
// Dispatches on the extension: ".json" is JSON, everything else XML.
LabeledTree load_tree(const std::filesystem::path& path);

// Dewey-encoded tree. Node index equals pre-order rank, which also equals the
// rank in Dewey order, so a subtree occupies the rank range [i, subtree_end).
class EncodedTree {
 public:
  struct Node {
    Value label;
    Dewey position;
    std::int32_t parent;        // -1 at the root
    std::uint32_t subtree_end;  // one past the last descendant
  };

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(std::uint32_t rank) const { return nodes_[rank]; }

  // Ranks of the nodes carrying `label`, ascending. Empty when absent.
  std::span<const std::uint32_t> positions_of(std::string_view label) const;
  const std::map<Value, std::vector<std::uint32_t>, std::less<>>& label_index() const noexcept {
    return by_label_;
  }

  bool is_descendant(std::uint32_t ancestor, std::uint32_t rank) const noexcept {
    return rank > ancestor && rank < nodes_[ancestor].subtree_end;
  }
  bool is_child(std::uint32_t parent, std::uint32_t rank) const noexcept {
    return nodes_[rank].parent == static_cast<std::int32_t>(parent);
  }
  bool satisfies(std::uint32_t upper, std::uint32_t lower, Axis axis) const noexcept {
    return axis == Axis::Child ? is_child(upper, lower) : is_descendant(upper, lower);
  }

 private:
  friend EncodedTree dewey_encode(const LabeledTree& tree);

  std::vector<Node> nodes_;
  std::map<Value, std::vector<std::uint32_t>, std::less<>> by_label_;
};

// One pre-order scan: the root gets [0], a child extends its parent's code
// with its 0-based sibling index.
EncodedTree dewey_encode(const LabeledTree& tree);

// (label value, position) rows of the nodes passing a pattern node's test.
// Refers to `tree`, which must outlive it.
struct NodeTable {
  const EncodedTree* tree = nullptr;
  std::vector<std::uint32_t> ranks;  // ascending

  std::size_t size() const noexcept { return ranks.size(); }
  const Value& label(std::size_t row) const { return tree->node(ranks[row]).label; }
  const Dewey& position(std::size_t row) const { return tree->node(ranks[row]).position; }
};

NodeTable node_table(const EncodedTree& tree, const NodeTest& test);

// Relation with set semantics: rows are sorted and distinct.
struct Relation {
  std::string name;
  std::vector<std::string> attributes;
  std::vector<std::vector<Value>> rows;
};

// Sorts and deduplicates; throws RaggedRow on arity mismatch.
Relation make_relation(std::string name, std::vector<std::string> attributes,
                       std::vector<std::vector<Value>> rows);
Relation load_relation_csv(const std::filesystem::path& path);
Relation parse_relation_csv(std::string_view text, std::string name = {});

// RFC 4180 field quoting for writers.
std::string csv_escape(std::string_view field);
std::string relation_to_csv(const Relation& relation);
// Elements for labels that are XML names, text for the remaining leaves.
// Throws UnsupportedKind when a label can be written neither way.
std::string tree_to_xml(const LabeledTree& tree);

// All data a query refers to, keyed by the FROM string of its atoms.
struct Database {
  std::map<std::string, Relation> relations;
  std::map<std::string, EncodedTree> trees;
};

// Loads every source named by the query, resolving relative paths against
// `base_dir`.
Database load_database(const ValidatedQuery& query, const std::filesystem::path& base_dir);
// Reads, parses and validates a query file.
ValidatedQuery load_query(const std::filesystem::path& path);

// Order-preserving string interning: ids follow bytewise order of the values.
class Dictionary {
 public:
  static Dictionary build(std::vector<Value> values);

  std::optional<std::uint32_t> find(std::string_view value) const;
  std::uint32_t id(std::string_view value) const;  // throws UnknownAttribute
  const Value& value(std::uint32_t id) const { return values_.at(id); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<Value> values_;
};

using AttrId = int;

// Row-major table of dictionary ids or tree ranks.
struct Table {
  std::vector<AttrId> attrs;
  std::vector<std::uint32_t> cells;

  std::size_t arity() const noexcept { return attrs.size(); }
  std::size_t rows() const noexcept { return attrs.empty() ? zero_arity_rows : cells.size() / attrs.size(); }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {cells.data() + i * attrs.size(), attrs.size()};
  }
  void add_row(std::span<const std::uint32_t> values);

  // A zero-arity table is either {()} or {}.
  std::size_t zero_arity_rows = 0;
};

// Sorted-array trie. Level d holds the distinct keys of the prefixes of length
// d + 1; the children of key i at level d are keys
// [child_begin[i], child_begin[i + 1]) at level d + 1.
class Trie {
 public:
  struct Level {
    std::vector<std::uint32_t> keys;
    std::vector<std::uint32_t> child_begin;
  };

  const std::vector<AttrId>& attrs() const noexcept { return attrs_; }
  std::size_t depth() const noexcept { return attrs_.size(); }
  const Level& level(std::size_t d) const { return levels_[d]; }
  bool empty() const noexcept { return levels_.empty() || levels_.front().keys.empty(); }
  std::size_t tuple_count() const noexcept { return levels_.empty() ? 0 : levels_.back().keys.size(); }

  // Root-to-leaf key paths in trie order.
  std::vector<std::vector<std::uint32_t>> enumerate() const;

 private:
  friend Trie build_trie(const Table& table, std::span<const AttrId> order);

  std::vector<AttrId> attrs_;
  std::vector<Level> levels_;
};

// Keys the table by its attributes sorted along `order`. Throws
// UnknownAttribute when an attribute is missing from `order`.
Trie build_trie(const Table& table, std::span<const AttrId> order);

}  // namespace cmcq
