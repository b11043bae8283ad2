#pragma once

// Instance generators: worst-case tree families with closed-form result
// sizes, the K1/K2 gadgets, the 1-in-3 SAT reduction, and seeded random
// instances for differential testing.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cmcq/ingest.hpp"
#include "cmcq/model.hpp"

namespace cmcq {

enum class Family { DescendantFan, ChildFan, MixedFan, MixedChain, TriangleLike };

std::string_view to_string(Family f);
Family parse_family(std::string_view name);  // throws UnsupportedKind
const std::vector<Family>& all_families();

// A query plus the data it reads, keyed by the query's FROM strings.
struct Instance {
  std::string name;
  std::string query_text;
  std::map<std::string, Relation> relations;
  std::map<std::string, LabeledTree> trees;
  std::uint64_t expected_rows = 0;  // closed form, when known
};

// `seed` permutes sibling order only; result sizes do not depend on it.
Instance gen_family(Family kind, std::size_t n, std::uint64_t seed = 0);

// The drawn two-by-two instance: one a-node with children b0..b3, c0..c3 and
// R1 = {b0, b1} x {c0, c1}.
Instance two_by_two_instance();

// The medical example: patients.csv, single.csv, reports.json.
Instance medical_instance();

Database to_database(const Instance& inst);

// Writes data files and query.cmcq into `dir` (created if needed).
void write_instance(const Instance& inst, const std::filesystem::path& dir);

// Largest per-label frequency over all trees and largest relation.
std::uint64_t instance_scale(const Instance& inst);

enum class GadgetKind { K1, K2 };

// K1((A,B),(C,D)): A[C]/D[B] with R1(B,C), R2(B,D).
// K2((A,B),(C,D,E,F)): D[A]/F/B//C/E with R1(A,F), R2(A,C,E), R3(B,C,E).
// Returns the statements (no RETURN) with atoms named after `prefix`.
std::string gadget_text(GadgetKind kind, const std::vector<std::string>& names, const std::string& prefix,
                        bool relations_as_paths = false);
// Full query over the gadget alone, returning every name. Throws ArityMismatch.
Query gadget(GadgetKind kind, const std::vector<std::string>& names);

struct Literal {
  int variable;  // 1-based
  bool positive;
  auto operator<=>(const Literal&) const = default;
};
using Clause3 = std::array<Literal, 3>;

// Throws TooFewClauses for fewer than two clauses. With `relations_as_paths`
// each relation atom becomes a child-only path pattern over its variables.
Query reduce_1in3sat(const std::vector<Clause3>& clauses, bool relations_as_paths = false);
std::string reduction_text(const std::vector<Clause3>& clauses, bool relations_as_paths = false);

// Brute force over all assignments of the occurring variables.
bool one_in_three_satisfiable(const std::vector<Clause3>& clauses);

// Every instance with `m` distinct clauses of three distinct variables out of
// `max_vars`, one representative per renaming of variables and reordering of
// clauses.
std::vector<std::vector<Clause3>> enumerate_1in3sat(int m, int max_vars);

struct RandomShape {
  std::size_t max_tree_nodes = 60;
  std::size_t max_relation_rows = 40;
  std::size_t max_pattern_nodes = 6;
  std::size_t max_descendant_axes = 6;
  std::size_t labels = 6;
  std::size_t variables = 4;
  std::size_t max_trees = 2;
  std::size_t max_relations = 2;
  // Rejection limit on the product of node-table sizes, which bounds what
  // value-first evaluation materializes.
  double max_node_table_product = 2e5;
};

Instance random_instance(std::uint64_t seed, const RandomShape& shape = {});

// Random bound-only query: one pattern with up to `max_nodes` nodes and
// `max_descendant` descendant axes plus random relations over its variables.
Query random_bound_query(std::uint64_t seed, std::size_t max_nodes = 8, std::size_t max_descendant = 5);

}  // namespace cmcq
