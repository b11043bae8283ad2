#include <algorithm>
#include <map>

#include "cmcq/error.hpp"
#include "eval.hpp"

namespace cmcq {
namespace {

using detail::EncodedQuery;

// Variables by frequency, each followed by the positions of the nodes that
// carry it (pre-order); positions of constant-only nodes go right after the
// nearest ancestor position already placed, or first.
std::vector<AttrId> attribute_order(const EncodedQuery& e, const std::vector<Table>& tables) {
  std::vector<std::vector<std::string>> table_vars;
  std::set<AttrId> present;
  for (const auto& t : tables) {
    std::vector<std::string> vars;
    for (AttrId a : t.attrs) {
      present.insert(a);
      if (!e.is_position(a)) vars.push_back(e.attr_name(a));
    }
    table_vars.push_back(std::move(vars));
  }

  std::vector<AttrId> order;
  for (const auto& v : frequency_order(table_vars)) {
    const int var = e.q->variable_id(v);
    order.push_back(var);
    for (const auto& atom : e.q->query().trees)
      for_each_node(atom.pattern, [&](const PatternNode& n) {
        if (e.variable_of(n) == var && present.count(e.position_attr(n.id))) order.push_back(e.position_attr(n.id));
      });
  }
  for (const auto& atom : e.q->query().trees) {
    for_each_node(atom.pattern, [&](const PatternNode& n) {
      const AttrId a = e.position_attr(n.id);
      if (n.test.has_variable() || !present.count(a)) return;
      std::vector<const PatternNode*> ancestors;
      for_each_node(atom.pattern, [&](const PatternNode& m) {
        if (find_node(m, n.id) && m.id != n.id) ancestors.push_back(&m);
      });
      auto at = order.begin();
      for (auto it = ancestors.rbegin(); it != ancestors.rend(); ++it) {
        auto pos = std::find(order.begin(), order.end(), e.position_attr((*it)->id));
        if (pos != order.end()) {
          at = pos + 1;
          break;
        }
      }
      order.insert(at, a);
    });
  }
  return order;
}

std::set<NodeId> all_nodes(const PatternNode& p) {
  std::set<NodeId> s;
  for_each_node(p, [&](const PatternNode& n) { s.insert(n.id); });
  return s;
}

}  // namespace

Evaluation cmjoin(const ValidatedQuery& q, const Database& db, const CmJoinOptions& opts) {
  detail::Stopwatch clock;
  const EncodedQuery e = detail::encode(q, db);
  Evaluation ev;
  Metrics& m = ev.metrics;

  const Bound rho1 = compute_bound(q, BoundMode::all_positions(), opts.bound);
  const Bound rho3 = compute_bound(q, BoundMode::labels_only(), opts.bound);
  const bool nodes_route_optimal = rho1.exponent <= rho3.exponent;
  bool nodes_route = nodes_route_optimal;
  if (opts.route == CmJoinOptions::Route::NodesAsTables) nodes_route = true;
  if (opts.route == CmJoinOptions::Route::PathsAsTables) nodes_route = false;

  if (nodes_route) {
    m.mode = "nodes-as-tables";
    m.optimality_certificate = nodes_route_optimal;
  } else {
    m.mode = "paths-as-tables";
    bool cert = compute_bound(q, BoundMode::branch_positions(), opts.bound).exponent <= rho3.exponent;
    for (const auto& t : q.query().trees)
      for (auto& path : root_to_leaf_paths(t.pattern))
        cert = cert && compute_bound(q, BoundMode::single_path(path), opts.bound).exponent <= rho3.exponent;
    m.optimality_certificate = cert;
  }
  (void)clock.lap_ms();  // bound computation is planning, not evaluation

  std::vector<Table> tables = e.relations;
  std::vector<StructuralPredicate> preds;
  for (std::size_t ti = 0; ti < q.query().trees.size(); ++ti) {
    const auto& atom = q.query().trees[ti];
    const EncodedTree* tree = e.trees[ti];
    if (nodes_route) {
      for_each_node_with_parent(atom.pattern, [&](const PatternNode& n, const PatternNode* parent) {
        tables.push_back(detail::node_table_of(e, ti, n));
        if (parent) preds.push_back({e.position_attr(parent->id), e.position_attr(n.id), n.axis, tree, false});
      });
      continue;
    }
    const std::set<NodeId> keep = opts.keep_all_positions ? all_nodes(atom.pattern) : branch_nodes(atom.pattern);
    const auto paths = root_to_leaf_paths(atom.pattern);
    for (std::size_t pi = 0; pi < paths.size(); ++pi) {
      PathTable pt = match_path(*tree, paths[pi], e.dict);
      m.add("path " + atom.name + "#" + std::to_string(pi), pt.rows(), clock.lap_ms());
      tables.push_back(detail::to_attr_table(e, project_branch(pt, keep), atom.pattern));
    }
    // Every edge lies on some path, so each predicate holds inside a path table.
    for_each_node_with_parent(atom.pattern, [&](const PatternNode& n, const PatternNode* parent) {
      if (parent && keep.count(parent->id) && keep.count(n.id))
        preds.push_back({e.position_attr(parent->id), e.position_attr(n.id), n.axis, tree, true});
    });
  }

  // Zero-arity tables are boolean: an empty one empties the result.
  bool empty = false;
  std::vector<Table> keyed;
  for (auto& t : tables) {
    if (t.arity() == 0) empty = empty || t.rows() == 0;
    else keyed.push_back(std::move(t));
  }

  const std::vector<AttrId> order = attribute_order(e, keyed);
  std::vector<std::string> names;
  for (AttrId a : order) names.push_back(e.attr_name(a));

  JoinOutput out;
  if (empty) {
    out.attrs = order;
  } else {
    std::vector<Trie> tries;
    for (const auto& t : keyed) tries.push_back(build_trie(t, order));
    out = generic_join(tries, preds, order, names);
  }
  for (auto& s : out.metrics.steps) m.add(std::move(s.name), s.rows, s.ms);
  ev.result = detail::project_result(e, out.attrs, out.cells);
  m.total_ms += clock.lap_ms();
  m.audit();
  return ev;
}

}  // namespace cmcq
