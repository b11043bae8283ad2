// Reference evaluators: structure-first (SJ), value-first (VJ) and a
// backtracking oracle. SJ and VJ deliberately join pairwise in query order.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>

#include "cmcq/error.hpp"
#include "eval.hpp"

namespace cmcq {
namespace {

using detail::EncodedQuery;

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint32_t>& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto v : k) h = (h ^ v) * 1099511628211ull;
    return h;
  }
};

// Natural join on shared attributes; set semantics.
Table natural_join(const Table& a, const Table& b) {
  if (a.arity() == 0) return a.rows() ? b : a;
  if (b.arity() == 0) {
    if (b.rows()) return a;
    Table empty;
    empty.attrs = a.attrs;
    return empty;
  }
  std::vector<std::size_t> sa, sb, rest;
  for (std::size_t j = 0; j < b.attrs.size(); ++j) {
    auto it = std::find(a.attrs.begin(), a.attrs.end(), b.attrs[j]);
    if (it == a.attrs.end()) {
      rest.push_back(j);
    } else {
      sa.push_back(static_cast<std::size_t>(it - a.attrs.begin()));
      sb.push_back(j);
    }
  }
  Table out;
  out.attrs = a.attrs;
  for (auto j : rest) out.attrs.push_back(b.attrs[j]);

  std::unordered_map<std::vector<std::uint32_t>, std::vector<std::size_t>, KeyHash> index;
  std::vector<std::uint32_t> key(sb.size());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    auto r = b.row(i);
    for (std::size_t k = 0; k < sb.size(); ++k) key[k] = r[sb[k]];
    index[key].push_back(i);
  }
  std::vector<std::uint32_t> row(out.attrs.size());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t k = 0; k < sa.size(); ++k) key[k] = r[sa[k]];
    auto it = index.find(key);
    if (it == index.end()) continue;
    std::copy(r.begin(), r.end(), row.begin());
    for (auto bi : it->second) {
      auto br = b.row(bi);
      for (std::size_t k = 0; k < rest.size(); ++k) row[a.arity() + k] = br[rest[k]];
      out.add_row(row);
    }
  }
  return detail::canonical_table(std::move(out));
}

Evaluation finish(const EncodedQuery& e, const Table& t, Metrics m, detail::Stopwatch& clock) {
  Evaluation ev;
  ev.result = detail::project_result(e, t.attrs, t.cells);
  m.total_ms += clock.lap_ms();
  m.audit();
  ev.metrics = std::move(m);
  return ev;
}

// Label-of-node attributes for SJ stitching live below zero.
AttrId node_label_attr(NodeId n) { return -(n + 1); }

Evaluation structure_join(const EncodedQuery& e) {
  detail::Stopwatch clock;
  Metrics m;
  m.mode = "sj";
  const auto& q = e.q->query();

  std::vector<Table> patterns;
  for (std::size_t ti = 0; ti < q.trees.size(); ++ti) {
    const auto& atom = q.trees[ti];
    const auto paths = root_to_leaf_paths(atom.pattern);
    std::optional<Table> acc;
    for (std::size_t pi = 0; pi < paths.size(); ++pi) {
      PathTable pt = match_path(*e.trees[ti], paths[pi], e.dict);
      Table t;
      for (const auto& c : pt.schema)
        t.attrs.push_back(c.kind == Column::Kind::Label ? node_label_attr(c.node) : e.position_attr(c.node));
      t.cells = std::move(pt.cells);
      m.add("path " + atom.name + "#" + std::to_string(pi), t.rows(), clock.lap_ms());
      if (!acc) {
        acc = std::move(t);
      } else {
        acc = natural_join(*acc, t);
        m.add("stitch " + atom.name + "#" + std::to_string(pi), acc->rows(), clock.lap_ms());
      }
    }
    // Node labels become variables; repeated variables must agree.
    Table p;
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < acc->attrs.size(); ++c) {
      const AttrId a = acc->attrs[c];
      if (a < 0) {
        const int var = e.variable_of(*find_node(atom.pattern, -a - 1));
        if (var < 0) continue;
        p.attrs.push_back(var);
      } else {
        p.attrs.push_back(a);
      }
      cols.push_back(c);
    }
    for (std::size_t i = 0; i < acc->rows(); ++i) {
      auto r = acc->row(i);
      for (auto c : cols) p.cells.push_back(r[c]);
    }
    p = detail::canonical_table(std::move(p));
    m.add("pattern " + atom.name, p.rows(), clock.lap_ms());
    patterns.push_back(std::move(p));
  }

  std::optional<Table> acc;
  auto step = [&](const Table& t, const std::string& name) {
    if (!acc) {
      acc = t;
      return;
    }
    acc = natural_join(*acc, t);
    m.add("join " + name, acc->rows(), clock.lap_ms());
  };
  for (std::size_t ti = 0; ti < patterns.size(); ++ti) step(patterns[ti], q.trees[ti].name);
  for (std::size_t ri = 0; ri < e.relations.size(); ++ri) step(e.relations[ri], q.relations[ri].name);
  return finish(e, *acc, std::move(m), clock);
}

Evaluation value_join(const EncodedQuery& e) {
  detail::Stopwatch clock;
  Metrics m;
  m.mode = "vj";
  const auto& q = e.q->query();

  std::optional<Table> acc;
  auto step = [&](const Table& t, const std::string& name) {
    if (!acc) {
      acc = t;
      return;
    }
    acc = natural_join(*acc, t);
    m.add("join " + name, acc->rows(), clock.lap_ms());
  };
  for (std::size_t ri = 0; ri < e.relations.size(); ++ri) step(e.relations[ri], q.relations[ri].name);
  struct Edge {
    AttrId upper, lower;
    Axis axis;
    const EncodedTree* tree;
  };
  std::vector<Edge> edges;
  for (std::size_t ti = 0; ti < q.trees.size(); ++ti) {
    const auto& atom = q.trees[ti];
    for_each_node_with_parent(atom.pattern, [&](const PatternNode& n, const PatternNode* parent) {
      step(detail::node_table_of(e, ti, n), atom.name + ".n" + std::to_string(n.id));
      if (parent) edges.push_back({e.position_attr(parent->id), e.position_attr(n.id), n.axis, e.trees[ti]});
    });
  }

  if (!edges.empty()) {
    Table filtered;
    filtered.attrs = acc->attrs;
    std::vector<std::pair<std::size_t, std::size_t>> cols;
    for (const auto& ed : edges) {
      auto u = std::find(acc->attrs.begin(), acc->attrs.end(), ed.upper);
      auto l = std::find(acc->attrs.begin(), acc->attrs.end(), ed.lower);
      cols.emplace_back(u - acc->attrs.begin(), l - acc->attrs.begin());
    }
    for (std::size_t i = 0; i < acc->rows(); ++i) {
      auto r = acc->row(i);
      bool ok = true;
      for (std::size_t k = 0; k < edges.size() && ok; ++k)
        ok = edges[k].tree->satisfies(r[cols[k].first], r[cols[k].second], edges[k].axis);
      if (ok) filtered.add_row(r);
    }
    acc = std::move(filtered);
    m.add("structural filter", acc->rows(), clock.lap_ms());
  }
  return finish(e, *acc, std::move(m), clock);
}

Evaluation naive(const EncodedQuery& e) {
  detail::Stopwatch clock;
  const auto& q = e.q->query();

  struct NodeAtom {
    std::size_t tree;
    const PatternNode* node;
    const PatternNode* parent;
  };
  std::vector<NodeAtom> nodes;
  for (std::size_t ti = 0; ti < q.trees.size(); ++ti)
    for_each_node_with_parent(q.trees[ti].pattern, [&](const PatternNode& n, const PatternNode* parent) {
      nodes.push_back({ti, &n, parent});
    });

  constexpr std::uint32_t kUnbound = UINT32_MAX;
  std::vector<std::uint32_t> value(static_cast<std::size_t>(e.num_variables), kUnbound);
  std::map<NodeId, std::uint32_t> rank;
  std::vector<int> ret;
  for (const auto& v : q.return_vars) ret.push_back(e.q->variable_id(v));
  std::vector<std::vector<std::uint32_t>> found;

  // Binds `var` to `id` unless it conflicts; reports whether it was fresh.
  auto bind = [&](int var, std::uint32_t id, bool& fresh) {
    auto& slot = value[static_cast<std::size_t>(var)];
    fresh = slot == kUnbound;
    if (fresh) slot = id;
    return slot == id;
  };

  std::function<void(std::size_t)> atoms_from;
  std::function<void(std::size_t)> nodes_from = [&](std::size_t k) {
    if (k == nodes.size()) {
      std::vector<std::uint32_t> row;
      for (int v : ret) row.push_back(value[static_cast<std::size_t>(v)]);
      found.push_back(std::move(row));
      return;
    }
    const auto& [ti, n, parent] = nodes[k];
    const EncodedTree& t = *e.trees[ti];
    const int var = e.variable_of(*n);
    auto try_rank = [&](std::uint32_t r) {
      if (n->test.has_constant() && t.node(r).label != n->test.constant) return;
      if (parent && !t.satisfies(rank.at(parent->id), r, n->axis)) return;
      bool fresh = false;
      if (var >= 0 && !bind(var, e.tree_labels[ti][r], fresh)) return;
      rank[n->id] = r;
      nodes_from(k + 1);
      if (fresh) value[static_cast<std::size_t>(var)] = kUnbound;
    };
    if (parent) {
      const std::uint32_t p = rank.at(parent->id);
      for (std::uint32_t r = p + 1; r < t.node(p).subtree_end; ++r) try_rank(r);
    } else {
      for (std::uint32_t r = 0; r < t.size(); ++r) try_rank(r);
    }
  };
  atoms_from = [&](std::size_t i) {
    if (i == e.relations.size()) {
      nodes_from(0);
      return;
    }
    const Table& t = e.relations[i];
    if (t.arity() == 0) {
      if (t.rows()) atoms_from(i + 1);
      return;
    }
    for (std::size_t r = 0; r < t.rows(); ++r) {
      auto row = t.row(r);
      std::vector<int> fresh_vars;
      bool ok = true;
      for (std::size_t c = 0; c < t.arity() && ok; ++c) {
        bool fresh = false;
        ok = bind(t.attrs[c], row[c], fresh);
        if (fresh) fresh_vars.push_back(t.attrs[c]);
      }
      if (ok) atoms_from(i + 1);
      for (int v : fresh_vars) value[static_cast<std::size_t>(v)] = kUnbound;
    }
  };
  atoms_from(0);

  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  Evaluation ev;
  ev.result.schema = q.return_vars;
  for (const auto& r : found) {
    std::vector<Value> row;
    for (auto id : r) row.push_back(e.dict->value(id));
    ev.result.rows.push_back(std::move(row));
  }
  ev.metrics.mode = "naive";
  ev.metrics.add("result", ev.result.rows.size(), clock.lap_ms());
  ev.metrics.audit();
  return ev;
}

}  // namespace

Evaluation baseline(Baseline algo, const ValidatedQuery& q, const Database& db) {
  const EncodedQuery e = detail::encode(q, db);
  switch (algo) {
    case Baseline::SJ: return structure_join(e);
    case Baseline::VJ: return value_join(e);
    case Baseline::Naive: return naive(e);
  }
  throw UnsupportedKind("unknown baseline");
}

}  // namespace cmcq
