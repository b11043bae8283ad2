#pragma once

// Worst-case output size bounds N^rho for cross-model conjunctive queries.
// Descendant axes are eliminated by conversion (tighten to a child axis) or
// split (cut the pattern, emitting compensation inequalities); every
// resulting canonical suite yields one packing LP and the bound is the
// maximum over suites.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmcq/model.hpp"
#include "cmcq/rational.hpp"

namespace cmcq {

struct LPVar {
  enum class Kind { Label, Position };

  Kind kind = Kind::Label;
  std::string variable;  // Label
  NodeId node = -1;      // Position

  static LPVar label(std::string variable) { return {Kind::Label, std::move(variable), -1}; }
  static LPVar position(NodeId node) { return {Kind::Position, {}, node}; }

  std::string to_string() const;  // "x_a", "p_3"
  auto operator<=>(const LPVar&) const = default;
};

// sum(vars) <= 1
struct Inequality {
  std::set<LPVar> vars;

  std::string to_string() const;  // "x_a + x_b <= 1"
  auto operator<=>(const Inequality&) const = default;
};

struct Suite {
  std::vector<Inequality> relations;
  std::vector<Inequality> compensations;
  std::vector<PatternNode> trees;

  bool canonical() const;
  std::string to_string() const;
};

struct BoundMode {
  enum class Kind { LabelsOnly, AllPositions, BranchPositions, SinglePath };

  Kind kind = Kind::LabelsOnly;
  PatternPath path;  // SinglePath only

  static BoundMode labels_only() { return {Kind::LabelsOnly, {}}; }
  static BoundMode all_positions() { return {Kind::AllPositions, {}}; }
  static BoundMode branch_positions() { return {Kind::BranchPositions, {}}; }
  static BoundMode single_path(PatternPath p) { return {Kind::SinglePath, std::move(p)}; }

  std::string name() const;  // "rho1", "rho2", "rho3", "rho4"
};

struct BoundOptions {
  enum class Search {
    Auto,             // exhaustive for small queries, else BranchAndBound
    Exhaustive,       // every canonical suite's LP is solved
    BranchAndBound,   // subtrees whose relaxation cannot beat the incumbent are skipped
  };

  bool opt1 = true;
  bool opt2 = true;
  Search search = Search::Auto;
  bool parallel = true;  // OpenMP across suite LPs in exhaustive search
};

struct BoundStats {
  std::size_t suites_enumerated = 0;   // canonical suites whose LP was solved
  std::size_t suites_pruned_opt1 = 0;  // split branches cut by optimization 1
  std::size_t suites_pruned_opt2 = 0;  // split branches cut by optimization 2
  std::size_t suites_pruned_bound = 0; // branches cut by the relaxation bound
};

struct Bound {
  Rational exponent;
  std::map<LPVar, Rational> witness;
  Suite suite;
  BoundStats stats;
};

// Label variables of a relation atom, one inequality per atom.
std::vector<Inequality> relation_inequalities(const ValidatedQuery& q);

// One inequality per root-to-leaf path. Position modes add the position of
// every path node the mode keeps (branch nodes of `t` for BranchPositions).
// Throws NotCanonical.
std::vector<Inequality> pc_path_inequalities(const PatternNode& t, const BoundMode& mode);

// The edge is named by its lower node. Throw NotDescendant.
PatternNode convert(const PatternNode& t, NodeId child);

struct SplitResult {
  PatternNode upper;
  PatternNode lower;
  std::vector<Inequality> compensations;  // label variables only
};
SplitResult split(const PatternNode& t, NodeId child);

// Highest descendant edge (smallest depth, then first in pre-order), named by
// its lower node.
std::optional<NodeId> highest_descendant_edge(const PatternNode& t);

struct SuiteEnumeration {
  std::vector<Suite> suites;
  BoundStats stats;
};

// Canonical suites of one pattern in label-only terms. Optimization 2 solves
// its auxiliary LPs over the label variables of `t` and `r`.
SuiteEnumeration canonical_suites(const PatternNode& t, const std::vector<Inequality>& ci,
                                  const std::vector<Inequality>& r, const BoundOptions& opts);

struct LpResult {
  Rational value;
  std::map<LPVar, Rational> witness;
};

// maximize sum(objective) s.t. every constraint, 0 <= x <= 1.
LpResult lp_max(const std::set<LPVar>& objective, const std::vector<Inequality>& constraints);

Bound compute_bound(const ValidatedQuery& q, const BoundMode& mode, const BoundOptions& opts = {});

// rho1, rho2, rho3 and, per root-to-leaf path of every pattern, rho4.
struct BoundSummary {
  Bound rho1, rho2, rho3;
  std::vector<std::pair<PatternPath, Bound>> rho4;
};
BoundSummary compute_all_bounds(const ValidatedQuery& q, const BoundOptions& opts = {}, bool with_paths = true);

// ceil(N^rho), exact.
mpz_class size_bound(std::uint64_t n, const Rational& rho);

}  // namespace cmcq
