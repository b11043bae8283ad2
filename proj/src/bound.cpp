#include "cmcq/bound.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "cmcq/error.hpp"
#include "cmcq/lp.hpp"

namespace cmcq {

std::string LPVar::to_string() const {
  return kind == Kind::Label ? "x_" + variable : "p_" + std::to_string(node);
}

std::string Inequality::to_string() const {
  std::string out;
  for (const auto& v : vars) {
    if (!out.empty()) out += " + ";
    out += v.to_string();
  }
  return out + " <= 1";
}

bool Suite::canonical() const {
  bool ok = true;
  for (const auto& t : trees)
    for_each_node(t, [&](const PatternNode& n) { ok = ok && n.axis != Axis::Descendant; });
  return ok;
}

std::string Suite::to_string() const {
  std::ostringstream os;
  os << "trees:";
  for (const auto& t : trees) os << ' ' << print_pattern(t);
  os << "; relations:";
  for (const auto& r : relations) os << " {" << r.to_string() << '}';
  os << "; compensations:";
  for (const auto& c : compensations) os << " {" << c.to_string() << '}';
  return os.str();
}

std::string BoundMode::name() const {
  switch (kind) {
    case Kind::AllPositions: return "rho1";
    case Kind::BranchPositions: return "rho2";
    case Kind::LabelsOnly: return "rho3";
    case Kind::SinglePath: return "rho4";
  }
  return "?";
}

namespace {

std::vector<Inequality> dedupe(std::vector<Inequality> v) {
  std::erase_if(v, [](const Inequality& i) { return i.vars.empty(); });
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool has_descendant(const PatternNode& t) {
  bool found = false;
  for_each_node(t, [&](const PatternNode& n) { found = found || n.axis == Axis::Descendant; });
  return found;
}

// Path from the root to `id`, inclusive; empty when absent.
bool path_to(const PatternNode& t, NodeId id, std::vector<const PatternNode*>& out) {
  out.push_back(&t);
  if (t.id == id) return true;
  for (const auto& c : t.children)
    if (path_to(c, id, out)) return true;
  out.pop_back();
  return false;
}

void leaf_paths(const PatternNode& t, std::vector<NodeId>& prefix, std::vector<std::vector<NodeId>>& out) {
  prefix.push_back(t.id);
  if (t.children.empty()) out.push_back(prefix);
  for (const auto& c : t.children) leaf_paths(c, prefix, out);
  prefix.pop_back();
}

std::vector<std::vector<NodeId>> leaf_paths(const PatternNode& t) {
  std::vector<NodeId> prefix;
  std::vector<std::vector<NodeId>> out;
  leaf_paths(t, prefix, out);
  return out;
}

const PatternNode& descendant_edge_child(const PatternNode& t, NodeId child) {
  const PatternNode* n = find_node(t, child);
  if (!n || n->axis != Axis::Descendant)
    throw NotDescendant("edge into node " + std::to_string(child) + " is not a descendant axis");
  return *n;
}

struct SplitIds {
  PatternNode upper;
  PatternNode lower;
  std::vector<std::vector<NodeId>> compensations;  // node sets
};

SplitIds split_ids(const PatternNode& t, NodeId child) {
  descendant_edge_child(t, child);
  std::vector<const PatternNode*> chain;
  path_to(t, child, chain);
  chain.pop_back();  // chain now ends at x

  std::vector<NodeId> to_x;
  for (const auto* n : chain) to_x.push_back(n->id);
  const NodeId x = to_x.back();

  SplitIds out;
  out.upper = t;
  PatternNode* parent = find_node(out.upper, x);
  auto it = std::find_if(parent->children.begin(), parent->children.end(),
                         [&](const PatternNode& c) { return c.id == child; });
  out.lower = std::move(*it);
  out.lower.axis = Axis::None;
  parent->children.erase(it);

  for (auto& p : leaf_paths(out.upper)) {
    if (std::find(p.begin(), p.end(), x) != p.end()) continue;
    std::vector<NodeId> ids = to_x;
    ids.insert(ids.end(), p.begin(), p.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    out.compensations.push_back(std::move(ids));
  }
  return out;
}

// Maximal child-connected pieces of a pattern: the result of splitting every
// descendant edge.
void child_components(const PatternNode& t, std::vector<PatternNode>& out) {
  PatternNode top = t;
  top.axis = Axis::None;
  std::vector<PatternNode> cut;
  std::function<void(PatternNode&)> strip = [&](PatternNode& n) {
    std::vector<PatternNode> kept;
    for (auto& c : n.children) {
      if (c.axis == Axis::Descendant) cut.push_back(std::move(c));
      else kept.push_back(std::move(c));
    }
    n.children = std::move(kept);
    for (auto& c : n.children) strip(c);
  };
  strip(top);
  out.push_back(std::move(top));
  for (auto& c : cut) child_components(c, out);
}

using Row = std::vector<int>;

class VarSpace {
 public:
  int intern(const LPVar& v) {
    auto [it, fresh] = index_.emplace(v, static_cast<int>(vars_.size()));
    if (fresh) vars_.push_back(v);
    return it->second;
  }
  const LPVar& var(int i) const { return vars_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return vars_.size(); }

  Inequality inequality(const Row& r) const {
    Inequality q;
    for (int i : r) q.vars.insert(var(i));
    return q;
  }

 private:
  std::vector<LPVar> vars_;
  std::map<LPVar, int> index_;
};

Row normalized(Row r) {
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

// Everything about a bound computation that does not change across suites.
struct Problem {
  VarSpace space;
  std::map<NodeId, Row> node_vars;  // LP variables a node contributes to structural rows
  std::vector<Row> relation_rows;
  std::vector<Row> node_table_rows;
  std::vector<bool> objective;
  BoundOptions opts;

  Row row_of(const std::vector<NodeId>& ids) const {
    Row r;
    for (NodeId id : ids) {
      auto it = node_vars.find(id);
      if (it != node_vars.end()) r.insert(r.end(), it->second.begin(), it->second.end());
    }
    return normalized(std::move(r));
  }

  void tree_rows(const PatternNode& t, std::vector<Row>& out) const {
    for (const auto& p : leaf_paths(t)) {
      Row r = row_of(p);
      if (!r.empty()) out.push_back(std::move(r));
    }
  }

  PackingSolution solve(const std::vector<Row>& rows) const {
    return solve_packing_lp(space.size(), objective, rows);
  }
};

struct Piece {
  PatternNode tree;
  bool converted = false;  // a conversion happened in this tree since its last split
};

struct State {
  std::vector<Piece> pending;
  std::vector<PatternNode> done;
  std::vector<Row> compensations;
};

struct Leaf {
  std::vector<Row> rows;
  State state;
};

class Search {
 public:
  Search(const Problem& p, bool branch_and_bound) : p_(p), bnb_(branch_and_bound) {}

  void run(State s) { explore(std::move(s)); }

  // Exhaustive mode: leaves to be solved by the caller.
  std::vector<Leaf>& leaves() { return leaves_; }
  BoundStats& stats() { return stats_; }

  // Branch-and-bound mode.
  bool has_best() const { return best_.has_value(); }
  const PackingSolution& best_solution() const { return best_solution_; }
  const State& best_state() const { return *best_; }

 private:
  std::vector<Row> rows_of(const State& s, bool relax_pending) const {
    std::vector<Row> rows = p_.relation_rows;
    rows.insert(rows.end(), p_.node_table_rows.begin(), p_.node_table_rows.end());
    rows.insert(rows.end(), s.compensations.begin(), s.compensations.end());
    for (const auto& t : s.done) p_.tree_rows(t, rows);
    for (const auto& piece : s.pending) {
      if (!relax_pending) {
        p_.tree_rows(piece.tree, rows);
        continue;
      }
      std::vector<PatternNode> parts;
      child_components(piece.tree, parts);
      for (const auto& part : parts) p_.tree_rows(part, rows);
    }
    return rows;
  }

  void leaf(State s, const PackingSolution* guide) {
    auto rows = rows_of(s, false);
    if (!bnb_) {
      leaves_.push_back({std::move(rows), std::move(s)});
      return;
    }
    ++stats_.suites_enumerated;
    // A parent relaxation optimum that is feasible here is optimal here too.
    auto sol = guide && satisfies(*guide, rows) ? *guide : p_.solve(rows);
    if (!best_ || sol.value > best_solution_.value) {
      best_solution_ = std::move(sol);
      best_ = std::move(s);
    }
  }

  static bool satisfies(const PackingSolution& sol, const std::vector<Row>& rows) {
    for (const auto& r : rows) {
      Rational sum = 0;
      for (int i : r) sum += sol.x[static_cast<std::size_t>(i)];
      if (sum > 1) return false;
    }
    return true;
  }

  static void settle(State& s) {
    std::vector<Piece> open;
    for (auto& piece : s.pending) {
      if (has_descendant(piece.tree)) open.push_back(std::move(piece));
      else s.done.push_back(std::move(piece.tree));
    }
    s.pending = std::move(open);
  }

  // Depth-first search for a canonical completion of `s` whose rows `x`
  // satisfies; on success its trees and compensations are appended to `out`.
  bool complete(State s, const PackingSolution& x, State& out) const {
    settle(s);
    if (!satisfies(x, rows_of(s, true))) return false;
    if (s.pending.empty()) {
      out.done.insert(out.done.end(), s.done.begin(), s.done.end());
      out.compensations.insert(out.compensations.end(), s.compensations.begin(), s.compensations.end());
      return true;
    }
    const Piece& piece = s.pending.front();
    const NodeId y = *highest_descendant_edge(piece.tree);
    std::vector<const PatternNode*> chain;
    path_to(piece.tree, y, chain);
    if (!is_merge_root(*chain[chain.size() - 2])) {
      State c = s;
      c.pending.front().tree = convert(piece.tree, y);
      if (complete(std::move(c), x, out)) return true;
    }
    SplitIds parts = split_ids(piece.tree, y);
    State t;
    t.done = s.done;
    t.compensations = s.compensations;
    for (const auto& ids : parts.compensations) {
      Row r = p_.row_of(ids);
      if (!r.empty()) t.compensations.push_back(std::move(r));
    }
    t.pending.push_back({std::move(parts.upper), false});
    t.pending.push_back({std::move(parts.lower), false});
    for (std::size_t i = 1; i < s.pending.size(); ++i) t.pending.push_back(s.pending[i]);
    return complete(std::move(t), x, out);
  }

  // `guide` is the parent's relaxation optimum. Every row of a child's
  // relaxation contains a row of its parent's, so the parent's value bounds
  // the child's and a guide that stays feasible needs no new LP.
  void explore(State s, const PackingSolution* guide = nullptr) {
    settle(s);
    if (s.pending.empty()) {
      leaf(std::move(s), guide);
      return;
    }

    PackingSolution relaxed;
    if (bnb_) {
      // Splitting every remaining descendant edge without compensations
      // relaxes every completion of this state.
      if (best_ && guide && guide->value <= best_solution_.value) {
        ++stats_.suites_pruned_bound;
        return;
      }
      const auto rows = rows_of(s, true);
      relaxed = guide && satisfies(*guide, rows) ? *guide : p_.solve(rows);
      if (best_ && relaxed.value <= best_solution_.value) {
        ++stats_.suites_pruned_bound;
        return;
      }
      // Pieces are independent. If the relaxation optimum fits some
      // completion of every piece, that suite attains the relaxation and
      // nothing below this state can do better. Otherwise branch on a piece
      // none of whose completions admits it.
      State whole;
      whole.done = s.done;
      whole.compensations = s.compensations;
      std::size_t violated = s.pending.size();
      for (std::size_t i = 0; i < s.pending.size() && violated == s.pending.size(); ++i) {
        State one;
        one.pending.push_back(s.pending[i]);
        if (!complete(std::move(one), relaxed, whole)) violated = i;
      }
      if (violated == s.pending.size()) {
        ++stats_.suites_enumerated;
        best_solution_ = std::move(relaxed);
        best_ = std::move(whole);
        return;
      }
      std::rotate(s.pending.begin(), s.pending.begin() + static_cast<std::ptrdiff_t>(violated),
                  s.pending.begin() + static_cast<std::ptrdiff_t>(violated) + 1);
    }

    const Piece& piece = s.pending.front();
    const NodeId y = *highest_descendant_edge(piece.tree);
    std::vector<const PatternNode*> chain;
    path_to(piece.tree, y, chain);
    const PatternNode& x = *chain[chain.size() - 2];

    std::vector<State> children;
    // Converting an edge of the merge root is dominated by splitting it: the
    // split adds no compensation and only drops structural rows.
    const bool may_convert = !is_merge_root(x);
    if (may_convert) {
      State c = s;
      c.pending.front().tree = convert(piece.tree, y);
      c.pending.front().converted = true;
      children.push_back(std::move(c));
    }

    bool may_split = true;
    SplitIds parts = split_ids(piece.tree, y);
    if (may_convert && p_.opts.opt1 && piece.converted) {
      ++stats_.suites_pruned_opt1;
      may_split = false;
    } else if (may_convert && p_.opts.opt2 && prune_split_by_opt2(s, parts, chain)) {
      ++stats_.suites_pruned_opt2;
      may_split = false;
    }
    if (may_split) {
      State t;
      t.done = s.done;
      t.compensations = s.compensations;
      for (const auto& ids : parts.compensations) {
        Row r = p_.row_of(ids);
        if (!r.empty()) t.compensations.push_back(std::move(r));
      }
      t.pending.push_back({std::move(parts.upper), false});
      t.pending.push_back({std::move(parts.lower), false});
      for (std::size_t i = 1; i < s.pending.size(); ++i) t.pending.push_back(std::move(s.pending[i]));
      children.push_back(std::move(t));
    }

    // Follow the relaxation optimum first: a child that keeps it feasible
    // reaches a suite as good as the relaxation, which then prunes the rest.
    if (bnb_ && children.size() == 2) {
      State probe = children[0];
      settle(probe);
      if (!satisfies(relaxed, rows_of(probe, true))) {
        State other = children[1];
        settle(other);
        if (satisfies(relaxed, rows_of(other, true))) std::swap(children[0], children[1]);
      }
    }
    for (auto& c : children) explore(std::move(c), bnb_ ? &relaxed : nullptr);
  }

  // The split of a leaf descendant edge (x, y) is redundant when adding the
  // converted tree's paths through y to the split suite leaves its optimum
  // unchanged: split-plus-those-paths implies every row of the conversion
  // suite, so the conversion is at least as large. Checked only when the
  // split suite is canonical, where both LPs are fully determined.
  bool prune_split_by_opt2(const State& s, const SplitIds& parts,
                           const std::vector<const PatternNode*>& chain) const {
    if (has_descendant(parts.lower) || has_descendant(parts.upper)) return false;
    for (std::size_t i = 1; i < s.pending.size(); ++i)
      if (has_descendant(s.pending[i].tree)) return false;

    State split_state;
    split_state.done = s.done;
    split_state.compensations = s.compensations;
    for (const auto& ids : parts.compensations) {
      Row r = p_.row_of(ids);
      if (!r.empty()) split_state.compensations.push_back(std::move(r));
    }
    split_state.done.push_back(parts.upper);
    split_state.done.push_back(parts.lower);
    for (std::size_t i = 1; i < s.pending.size(); ++i) split_state.done.push_back(s.pending[i].tree);

    auto rows = rows_of(split_state, false);
    const Rational base = p_.solve(rows).value;

    std::vector<NodeId> to_x;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) to_x.push_back(chain[i]->id);
    for (auto path : leaf_paths(parts.lower)) {
      path.insert(path.begin(), to_x.begin(), to_x.end());
      Row r = p_.row_of(path);
      if (!r.empty()) rows.push_back(std::move(r));
    }
    return p_.solve(rows).value == base;
  }

  const Problem& p_;
  bool bnb_;
  std::vector<Leaf> leaves_;
  BoundStats stats_;
  std::optional<State> best_;
  PackingSolution best_solution_;
};

std::size_t count_descendant_edges(const PatternNode& t) {
  std::size_t n = 0;
  for_each_node_with_parent(t, [&](const PatternNode& node, const PatternNode* parent) {
    if (node.axis == Axis::Descendant && !(parent && is_merge_root(*parent))) ++n;
  });
  return n;
}

// Exhaustive cut-off for Search::Auto.
constexpr std::size_t kExhaustiveEdgeLimit = 6;

struct Outcome {
  PackingSolution solution;
  State state;
  BoundStats stats;
};

// Solves every leaf LP; ties go to the earliest leaf so results do not depend
// on the thread count.
std::size_t best_leaf(const Problem& p, const std::vector<Leaf>& leaves, std::vector<PackingSolution>& sols,
                      bool parallel) {
  sols.resize(leaves.size());
  const auto n = static_cast<std::ptrdiff_t>(leaves.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) sols[static_cast<std::size_t>(i)] = p.solve(leaves[static_cast<std::size_t>(i)].rows);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) sols[static_cast<std::size_t>(i)] = p.solve(leaves[static_cast<std::size_t>(i)].rows);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < sols.size(); ++i)
    if (sols[i].value > sols[best].value) best = i;
  return best;
}

Outcome search(const Problem& p, State start, std::size_t descendant_edges) {
  bool bnb = p.opts.search == BoundOptions::Search::BranchAndBound;
  if (p.opts.search == BoundOptions::Search::Auto) bnb = descendant_edges > kExhaustiveEdgeLimit;

  Search s(p, bnb);
  s.run(std::move(start));
  if (bnb) {
    if (!s.has_best()) throw InvariantViolation("suite search found no canonical suite");
    return {s.best_solution(), s.best_state(), s.stats()};
  }
  auto& leaves = s.leaves();
  if (leaves.empty()) throw InvariantViolation("suite search found no canonical suite");
  std::vector<PackingSolution> sols;
  const std::size_t i = best_leaf(p, leaves, sols, p.opts.parallel);
  BoundStats stats = s.stats();
  stats.suites_enumerated = leaves.size();
  return {std::move(sols[i]), std::move(leaves[i].state), stats};
}

Bound make_bound(const Problem& p, Outcome&& o) {
  Bound b;
  b.exponent = o.solution.value;
  for (std::size_t i = 0; i < p.space.size(); ++i) {
    const LPVar& v = p.space.var(static_cast<int>(i));
    if (p.objective[i] || v.kind == LPVar::Kind::Label) b.witness[v] = o.solution.x[i];
  }
  for (const auto& r : p.relation_rows) b.suite.relations.push_back(p.space.inequality(r));
  for (const auto& r : o.state.compensations) b.suite.compensations.push_back(p.space.inequality(r));
  b.suite.relations = dedupe(std::move(b.suite.relations));
  b.suite.compensations = dedupe(std::move(b.suite.compensations));
  b.suite.trees = std::move(o.state.done);
  b.stats = o.stats;
  return b;
}

PatternNode path_as_pattern(const PatternPath& path) {
  if (path.nodes.empty()) throw InvariantViolation("empty pattern path");
  PatternNode root{path.nodes.back().id, path.nodes.back().test, Axis::None, {}};
  for (std::size_t i = path.nodes.size() - 1; i-- > 0;) {
    root.axis = path.axes[i];
    PatternNode up{path.nodes[i].id, path.nodes[i].test, Axis::None, {}};
    up.children.push_back(std::move(root));
    root = std::move(up);
  }
  return root;
}

}  // namespace

std::optional<NodeId> highest_descendant_edge(const PatternNode& t) {
  std::optional<NodeId> best;
  std::size_t best_depth = 0;
  std::function<void(const PatternNode&, std::size_t)> walk = [&](const PatternNode& n, std::size_t depth) {
    if (n.axis == Axis::Descendant && (!best || depth < best_depth)) {
      best = n.id;
      best_depth = depth;
    }
    for (const auto& c : n.children) walk(c, depth + 1);
  };
  walk(t, 0);
  return best;
}

std::vector<Inequality> relation_inequalities(const ValidatedQuery& q) {
  std::vector<Inequality> out;
  for (const auto& r : q.query().relations) {
    Inequality i;
    for (const auto& a : r.attributes) i.vars.insert(LPVar::label(a));
    out.push_back(std::move(i));
  }
  return out;
}

std::vector<Inequality> pc_path_inequalities(const PatternNode& t, const BoundMode& mode) {
  if (has_descendant(t)) throw NotCanonical("pattern " + print_pattern(t) + " has a descendant axis");
  std::set<NodeId> keep;
  if (mode.kind == BoundMode::Kind::BranchPositions) {
    keep = branch_nodes(t);
  } else if (mode.kind != BoundMode::Kind::LabelsOnly) {
    for_each_node(t, [&](const PatternNode& n) { keep.insert(n.id); });
  }
  std::vector<Inequality> out;
  for (const auto& path : leaf_paths(t)) {
    Inequality q;
    for (NodeId id : path) {
      const PatternNode* n = find_node(t, id);
      if (n->test.has_variable()) q.vars.insert(LPVar::label(n->test.variable));
      if (keep.count(id) && !is_merge_root(*n)) q.vars.insert(LPVar::position(id));
    }
    out.push_back(std::move(q));
  }
  return dedupe(std::move(out));
}

PatternNode convert(const PatternNode& t, NodeId child) {
  descendant_edge_child(t, child);
  PatternNode out = t;
  find_node(out, child)->axis = Axis::Child;
  return out;
}

SplitResult split(const PatternNode& t, NodeId child) {
  SplitIds s = split_ids(t, child);
  SplitResult out{std::move(s.upper), std::move(s.lower), {}};
  for (const auto& ids : s.compensations) {
    Inequality q;
    for (NodeId id : ids) {
      const PatternNode* n = find_node(t, id);
      if (n->test.has_variable()) q.vars.insert(LPVar::label(n->test.variable));
    }
    out.compensations.push_back(std::move(q));
  }
  out.compensations = dedupe(std::move(out.compensations));
  return out;
}

SuiteEnumeration canonical_suites(const PatternNode& t, const std::vector<Inequality>& ci,
                                  const std::vector<Inequality>& r, const BoundOptions& opts) {
  Problem p;
  p.opts = opts;
  for_each_node(t, [&](const PatternNode& n) {
    if (n.test.has_variable()) p.node_vars[n.id] = {p.space.intern(LPVar::label(n.test.variable))};
  });
  auto to_row = [&](const Inequality& q) {
    Row row;
    for (const auto& v : q.vars) row.push_back(p.space.intern(v));
    return normalized(std::move(row));
  };
  for (const auto& q : r) p.relation_rows.push_back(to_row(q));
  State start;
  for (const auto& q : ci) start.compensations.push_back(to_row(q));
  p.objective.assign(p.space.size(), false);
  for (std::size_t i = 0; i < p.space.size(); ++i) {
    const LPVar& v = p.space.var(static_cast<int>(i));
    p.objective[i] = v.kind == LPVar::Kind::Label && v.variable != kMergeRootVariable;
  }
  start.pending.push_back({t, false});

  Search s(p, false);
  s.run(std::move(start));
  SuiteEnumeration out;
  out.stats = s.stats();
  out.stats.suites_enumerated = s.leaves().size();
  for (auto& leaf : s.leaves()) {
    Suite suite;
    for (const auto& row : p.relation_rows) suite.relations.push_back(p.space.inequality(row));
    for (const auto& row : leaf.state.compensations) suite.compensations.push_back(p.space.inequality(row));
    suite.relations = dedupe(std::move(suite.relations));
    suite.compensations = dedupe(std::move(suite.compensations));
    suite.trees = std::move(leaf.state.done);
    out.suites.push_back(std::move(suite));
  }
  return out;
}

LpResult lp_max(const std::set<LPVar>& objective, const std::vector<Inequality>& constraints) {
  VarSpace space;
  for (const auto& v : objective) space.intern(v);
  std::vector<Row> rows;
  for (const auto& q : constraints) {
    Row r;
    for (const auto& v : q.vars) r.push_back(space.intern(v));
    rows.push_back(normalized(std::move(r)));
  }
  std::vector<bool> obj(space.size(), false);
  for (std::size_t i = 0; i < objective.size(); ++i) obj[i] = true;  // interned first
  auto sol = solve_packing_lp(space.size(), obj, rows);
  LpResult out{sol.value, {}};
  for (std::size_t i = 0; i < space.size(); ++i) out.witness[space.var(static_cast<int>(i))] = sol.x[i];
  return out;
}

Bound compute_bound(const ValidatedQuery& q, const BoundMode& mode, const BoundOptions& opts) {
  Problem p;
  p.opts = opts;
  const bool positions = mode.kind != BoundMode::Kind::LabelsOnly;

  PatternNode pattern;
  std::set<NodeId> branch;
  bool have_pattern = true;
  if (mode.kind == BoundMode::Kind::SinglePath) {
    pattern = path_as_pattern(mode.path);
  } else {
    std::vector<PatternNode> patterns;
    for (const auto& t : q.query().trees) {
      patterns.push_back(t.pattern);
      auto b = branch_nodes(t.pattern);
      branch.insert(b.begin(), b.end());
    }
    have_pattern = !patterns.empty();
    if (have_pattern) pattern = merge_patterns(std::move(patterns));
  }

  // Relation variables first keeps witness order stable across modes.
  if (mode.kind != BoundMode::Kind::SinglePath) {
    for (const auto& r : q.query().relations) {
      Row row;
      for (const auto& a : r.attributes) row.push_back(p.space.intern(LPVar::label(a)));
      p.relation_rows.push_back(normalized(std::move(row)));
    }
  }
  if (have_pattern) {
    for_each_node(pattern, [&](const PatternNode& n) {
      Row vars;
      int label = -1;
      if (n.test.has_variable()) vars.push_back(label = p.space.intern(LPVar::label(n.test.variable)));
      const bool keep_position = positions && !is_merge_root(n) &&
                                 (mode.kind != BoundMode::Kind::BranchPositions || branch.count(n.id));
      if (keep_position) {
        const int pos = p.space.intern(LPVar::position(n.id));
        vars.push_back(pos);
        p.node_table_rows.push_back(label >= 0 ? normalized({label, pos}) : Row{pos});
      }
      if (!vars.empty()) p.node_vars[n.id] = std::move(vars);
    });
  }

  p.objective.assign(p.space.size(), false);
  for (std::size_t i = 0; i < p.space.size(); ++i) {
    const LPVar& v = p.space.var(static_cast<int>(i));
    p.objective[i] = !(v.kind == LPVar::Kind::Label && v.variable == kMergeRootVariable);
  }

  State start;
  std::size_t edges = 0;
  if (have_pattern) {
    start.pending.push_back({pattern, false});
    edges = count_descendant_edges(pattern);
  }
  return make_bound(p, search(p, std::move(start), edges));
}

BoundSummary compute_all_bounds(const ValidatedQuery& q, const BoundOptions& opts, bool with_paths) {
  BoundSummary s{compute_bound(q, BoundMode::all_positions(), opts),
                 compute_bound(q, BoundMode::branch_positions(), opts),
                 compute_bound(q, BoundMode::labels_only(), opts),
                 {}};
  if (with_paths)
    for (const auto& t : q.query().trees)
      for (auto& path : root_to_leaf_paths(t.pattern)) {
        Bound b = compute_bound(q, BoundMode::single_path(path), opts);
        s.rho4.emplace_back(std::move(path), std::move(b));
      }
  return s;
}

mpz_class size_bound(std::uint64_t n, const Rational& rho) {
  if (sgn(rho) < 0) throw InvariantViolation("negative exponent");
  const mpz_class& num = rho.get_num();
  const mpz_class& den = rho.get_den();
  // ceil(n^(num/den)): smallest r with r^den >= n^num.
  mpz_class power;
  mpz_class base(static_cast<unsigned long>(n));
  mpz_pow_ui(power.get_mpz_t(), base.get_mpz_t(), num.get_ui());
  mpz_class r;
  const int exact = mpz_root(r.get_mpz_t(), power.get_mpz_t(), den.get_ui());
  if (!exact) r += 1;
  return r;
}

}  // namespace cmcq
