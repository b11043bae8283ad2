#pragma once

// Shared plumbing for the evaluators: one dictionary over every value the
// query can touch, relations and tree labels as dictionary ids, and the
// attribute numbering (variables first, then one position per pattern node).

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "cmcq/engine.hpp"

namespace cmcq::detail {

struct EncodedQuery {
  const ValidatedQuery* q = nullptr;
  std::shared_ptr<const Dictionary> dict;
  std::vector<Table> relations;                          // per relation atom, attrs = variable ids
  std::vector<const EncodedTree*> trees;                 // per tree atom
  std::vector<std::vector<std::uint32_t>> tree_labels;   // per tree atom: label id by rank
  int num_variables = 0;

  AttrId position_attr(NodeId node) const { return num_variables + node; }
  bool is_position(AttrId a) const { return a >= num_variables; }
  NodeId node_of(AttrId a) const { return a - num_variables; }
  std::string attr_name(AttrId a) const {
    return is_position(a) ? "p" + std::to_string(node_of(a)) : q->variables()[static_cast<std::size_t>(a)];
  }
  // -1 for constant-only nodes.
  int variable_of(const PatternNode& n) const {
    return n.test.has_variable() ? q->variable_id(n.test.variable) : -1;
  }
};

EncodedQuery encode(const ValidatedQuery& q, const Database& db);

// Collapses repeated attributes, keeping rows where the repeats agree, and
// removes duplicate rows.
Table canonical_table(Table t);

// Node table of pattern node `n` as (variable, position) or (position).
Table node_table_of(const EncodedQuery& e, std::size_t tree, const PatternNode& n);

// Path table with label columns renamed to variables (constant-only labels
// dropped) and position columns to position attributes.
Table to_attr_table(const EncodedQuery& e, const ColumnTable& t, const PatternNode& pattern);

ResultSet project_result(const EncodedQuery& e, const std::vector<AttrId>& attrs,
                         const std::vector<std::uint32_t>& cells);

class Stopwatch {
 public:
  double lap_ms() {
    auto now = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace cmcq::detail
