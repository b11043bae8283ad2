#pragma once

// Query evaluation: path matching over Dewey-encoded trees, branch-position
// projection, attribute-at-a-time generic join with structural predicates,
// the CMJoin driver, the SJ / VJ baselines and a backtracking oracle.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cmcq/bound.hpp"
#include "cmcq/ingest.hpp"
#include "cmcq/model.hpp"

namespace cmcq {

struct Metrics {
  struct Step {
    std::string name;
    std::uint64_t rows = 0;
    double ms = 0;
  };

  std::vector<Step> steps;
  std::uint64_t total_intermediate = 0;
  double total_ms = 0;
  std::string mode;  // "nodes-as-tables" | "paths-as-tables" | baseline name
  bool optimality_certificate = false;

  void add(std::string name, std::uint64_t rows, double ms);
  // Throws InvariantViolation unless total_intermediate is the step sum.
  void audit() const;
  // Step names and row counts; what must repeat across identical runs.
  std::vector<std::pair<std::string, std::uint64_t>> structure() const;
};

struct ResultSet {
  std::vector<std::string> schema;
  std::vector<std::vector<Value>> rows;  // sorted, distinct

  bool operator==(const ResultSet&) const = default;
};

// Column of a materialized table: a node's label or its position (rank in
// the node's tree).
struct Column {
  enum class Kind { Label, Position };
  Kind kind;
  NodeId node;
  bool operator==(const Column&) const = default;
};

// Label cells are ids in `dict`; position cells are tree ranks.
struct ColumnTable {
  std::vector<Column> schema;
  std::vector<std::uint32_t> cells;
  std::shared_ptr<const Dictionary> dict;

  std::size_t rows() const { return schema.empty() ? 0 : cells.size() / schema.size(); }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {cells.data() + i * schema.size(), schema.size()};
  }
  int column_of(Column c) const;  // -1 when absent
};

using PathTable = ColumnTable;

// Schema (label, position) per path node, top-down. Rows are sorted by the
// position columns, which is document order of the bindings.
PathTable match_path(const EncodedTree& t, const PatternPath& p);
PathTable match_path(const EncodedTree& t, const PatternPath& p, std::shared_ptr<const Dictionary> dict);

// Drops the position columns of nodes outside `branches` and deduplicates.
ColumnTable project_branch(const PathTable& pt, const std::set<NodeId>& branches);

// Parent/child or ancestor/descendant between two position attributes.
struct StructuralPredicate {
  AttrId upper;
  AttrId lower;
  Axis axis;
  const EncodedTree* tree;
  bool pre_enforced = false;  // already guaranteed by a path table
};

struct JoinOutput {
  std::vector<AttrId> attrs;  // the attribute order
  std::vector<std::uint32_t> cells;
  Metrics metrics;

  std::size_t rows() const { return attrs.empty() ? 0 : cells.size() / attrs.size(); }
};

// Attribute-at-a-time join. At each attribute the tries holding it are
// intersected by galloping seeks driven by the smallest candidate range;
// a predicate whose upper end is bound narrows the lower end to the upper
// node's subtree range, and is checked as a filter otherwise. `names`
// labels the per-level metric steps.
JoinOutput generic_join(const std::vector<Trie>& tries, const std::vector<StructuralPredicate>& preds,
                        const std::vector<AttrId>& order, const std::vector<std::string>& names = {});

struct CmJoinOptions {
  enum class Route { Auto, NodesAsTables, PathsAsTables };
  Route route = Route::Auto;
  bool keep_all_positions = false;  // skip branch projection
  BoundOptions bound;
};

struct Evaluation {
  ResultSet result;
  Metrics metrics;
};

Evaluation cmjoin(const ValidatedQuery& q, const Database& db, const CmJoinOptions& opts = {});

enum class Baseline { SJ, VJ, Naive };
Evaluation baseline(Baseline algo, const ValidatedQuery& q, const Database& db);

// Global attribute order over variables: descending number of input tables
// mentioning the variable, ties by name. One entry per table.
std::vector<std::string> frequency_order(const std::vector<std::vector<std::string>>& table_variables);

}  // namespace cmcq
