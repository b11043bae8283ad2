#include "eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "cmcq/error.hpp"

namespace cmcq {

void Metrics::add(std::string name, std::uint64_t rows, double ms) {
  steps.push_back({std::move(name), rows, ms});
  total_intermediate += rows;
  total_ms += ms;
}

void Metrics::audit() const {
  std::uint64_t sum = 0;
  for (const auto& s : steps) sum += s.rows;
  if (sum != total_intermediate)
    throw InvariantViolation("metrics audit: total_intermediate " + std::to_string(total_intermediate) +
                             " != step sum " + std::to_string(sum));
}

std::vector<std::pair<std::string, std::uint64_t>> Metrics::structure() const {
  std::vector<std::pair<std::string, std::uint64_t>> out;
  for (const auto& s : steps) out.emplace_back(s.name, s.rows);
  return out;
}

int ColumnTable::column_of(Column c) const {
  auto it = std::find(schema.begin(), schema.end(), c);
  return it == schema.end() ? -1 : static_cast<int>(it - schema.begin());
}

namespace {

std::vector<std::uint32_t> label_ids(const EncodedTree& t, const Dictionary& dict) {
  std::vector<std::uint32_t> out(t.size());
  for (const auto& [label, ranks] : t.label_index()) {
    const std::uint32_t id = dict.id(label);
    for (auto r : ranks) out[r] = id;
  }
  return out;
}

// Ranks below `r` on `axis` that pass `test`, ascending.
template <typename Fn>
void for_each_below(const EncodedTree& t, std::uint32_t r, Axis axis, const NodeTest& test, Fn&& fn) {
  const std::uint32_t end = t.node(r).subtree_end;
  if (test.has_constant()) {
    auto ranks = t.positions_of(test.constant);
    auto it = std::upper_bound(ranks.begin(), ranks.end(), r);
    for (; it != ranks.end() && *it < end; ++it)
      if (axis == Axis::Descendant || t.is_child(r, *it)) fn(*it);
    return;
  }
  if (axis == Axis::Descendant) {
    for (std::uint32_t c = r + 1; c < end; ++c) fn(c);
  } else {
    for (std::uint32_t c = r + 1; c < end; c = t.node(c).subtree_end) fn(c);
  }
}

}  // namespace

PathTable match_path(const EncodedTree& t, const PatternPath& p, std::shared_ptr<const Dictionary> dict) {
  PathTable out;
  for (const auto& step : p.nodes) {
    out.schema.push_back({Column::Kind::Label, step.id});
    out.schema.push_back({Column::Kind::Position, step.id});
  }
  out.dict = dict;
  if (p.nodes.empty() || t.size() == 0) return out;
  const auto labels = label_ids(t, *dict);

  std::vector<std::uint32_t> bound(p.nodes.size());
  auto emit = [&] {
    for (auto r : bound) {
      out.cells.push_back(labels[r]);
      out.cells.push_back(r);
    }
  };
  auto extend = [&](auto&& self, std::size_t depth) -> void {
    if (depth == p.nodes.size()) {
      emit();
      return;
    }
    for_each_below(t, bound[depth - 1], p.axes[depth - 1], p.nodes[depth].test, [&](std::uint32_t c) {
      bound[depth] = c;
      self(self, depth + 1);
    });
  };

  const NodeTest& top = p.nodes[0].test;
  auto start = [&](std::uint32_t r) {
    bound[0] = r;
    extend(extend, 1);
  };
  if (top.has_constant()) {
    for (auto r : t.positions_of(top.constant)) start(r);
  } else {
    for (std::uint32_t r = 0; r < t.size(); ++r) start(r);
  }
  return out;
}

PathTable match_path(const EncodedTree& t, const PatternPath& p) {
  std::vector<Value> labels;
  for (const auto& [label, ranks] : t.label_index()) labels.push_back(label);
  return match_path(t, p, std::make_shared<const Dictionary>(Dictionary::build(std::move(labels))));
}

ColumnTable project_branch(const PathTable& pt, const std::set<NodeId>& branches) {
  ColumnTable out;
  out.dict = pt.dict;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < pt.schema.size(); ++c)
    if (pt.schema[c].kind == Column::Kind::Label || branches.count(pt.schema[c].node)) {
      keep.push_back(c);
      out.schema.push_back(pt.schema[c]);
    }
  const std::size_t k = keep.size();
  if (k == 0) return out;
  std::vector<std::vector<std::uint32_t>> rows;
  rows.reserve(pt.rows());
  for (std::size_t i = 0; i < pt.rows(); ++i) {
    auto r = pt.row(i);
    std::vector<std::uint32_t> v(k);
    for (std::size_t j = 0; j < k; ++j) v[j] = r[keep[j]];
    rows.push_back(std::move(v));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  out.cells.reserve(rows.size() * k);
  for (const auto& r : rows) out.cells.insert(out.cells.end(), r.begin(), r.end());
  return out;
}

std::vector<std::string> frequency_order(const std::vector<std::vector<std::string>>& table_variables) {
  std::map<std::string, int> count;
  for (const auto& vars : table_variables) {
    std::set<std::string> distinct(vars.begin(), vars.end());
    for (const auto& v : distinct) ++count[v];
  }
  std::vector<std::string> out;
  for (const auto& [v, n] : count) out.push_back(v);
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return count[a] > count[b]; });
  return out;
}

namespace detail {

EncodedQuery encode(const ValidatedQuery& q, const Database& db) {
  EncodedQuery e;
  e.q = &q;
  e.num_variables = static_cast<int>(q.variables().size());

  std::vector<Value> values;
  std::vector<const Relation*> rels;
  for (const auto& atom : q.query().relations) {
    auto it = db.relations.find(atom.source);
    if (it == db.relations.end()) throw MissingSource("no data loaded for " + atom.source);
    if (it->second.attributes.size() != atom.attributes.size())
      throw ArityMismatch("relation " + atom.name + " expects " + std::to_string(atom.attributes.size()) +
                          " columns, data has " + std::to_string(it->second.attributes.size()));
    rels.push_back(&it->second);
    for (const auto& row : it->second.rows) values.insert(values.end(), row.begin(), row.end());
  }
  for (const auto& atom : q.query().trees) {
    auto it = db.trees.find(atom.source);
    if (it == db.trees.end()) throw MissingSource("no data loaded for " + atom.source);
    e.trees.push_back(&it->second);
    for (const auto& [label, ranks] : it->second.label_index()) values.push_back(label);
  }
  e.dict = std::make_shared<const Dictionary>(Dictionary::build(std::move(values)));

  for (std::size_t i = 0; i < rels.size(); ++i) {
    Table t;
    for (const auto& a : q.query().relations[i].attributes) t.attrs.push_back(q.variable_id(a));
    std::vector<std::uint32_t> row(t.attrs.size());
    for (const auto& r : rels[i]->rows) {
      for (std::size_t c = 0; c < r.size(); ++c) row[c] = e.dict->id(r[c]);
      t.add_row(row);
    }
    e.relations.push_back(canonical_table(std::move(t)));
  }
  for (const auto* t : e.trees) e.tree_labels.push_back(label_ids(*t, *e.dict));
  return e;
}

Table canonical_table(Table t) {
  const std::size_t k = t.arity();
  std::vector<std::size_t> first(k);
  std::vector<AttrId> attrs;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < k; ++c) {
    auto it = std::find(t.attrs.begin(), t.attrs.begin() + static_cast<std::ptrdiff_t>(c), t.attrs[c]);
    first[c] = static_cast<std::size_t>(it - t.attrs.begin());
    if (first[c] == c) {
      keep.push_back(c);
      attrs.push_back(t.attrs[c]);
    }
  }
  std::vector<std::vector<std::uint32_t>> rows;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto r = t.row(i);
    bool ok = true;
    for (std::size_t c = 0; c < k && ok; ++c) ok = r[c] == r[first[c]];
    if (!ok) continue;
    std::vector<std::uint32_t> v;
    for (auto c : keep) v.push_back(r[c]);
    rows.push_back(std::move(v));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  Table out;
  out.attrs = std::move(attrs);
  if (out.attrs.empty() && !rows.empty()) out.zero_arity_rows = 1;
  for (const auto& r : rows) out.add_row(r);
  return out;
}

Table node_table_of(const EncodedQuery& e, std::size_t tree, const PatternNode& n) {
  const EncodedTree& t = *e.trees[tree];
  const auto& labels = e.tree_labels[tree];
  const NodeTable nt = node_table(t, n.test);
  Table out;
  const int var = e.variable_of(n);
  if (var >= 0) out.attrs.push_back(var);
  out.attrs.push_back(e.position_attr(n.id));
  out.cells.reserve(nt.size() * out.attrs.size());
  for (auto r : nt.ranks) {
    if (var >= 0) out.cells.push_back(labels[r]);
    out.cells.push_back(r);
  }
  return out;
}

Table to_attr_table(const EncodedQuery& e, const ColumnTable& t, const PatternNode& pattern) {
  Table out;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.schema.size(); ++c) {
    const Column& col = t.schema[c];
    if (col.kind == Column::Kind::Position) {
      out.attrs.push_back(e.position_attr(col.node));
    } else {
      const int var = e.variable_of(*find_node(pattern, col.node));
      if (var < 0) continue;
      out.attrs.push_back(var);
    }
    cols.push_back(c);
  }
  if (cols.empty()) {
    out.zero_arity_rows = t.rows() > 0 ? 1 : 0;
    return out;
  }
  out.cells.reserve(t.rows() * cols.size());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto r = t.row(i);
    for (auto c : cols) out.cells.push_back(r[c]);
  }
  return canonical_table(std::move(out));
}

ResultSet project_result(const EncodedQuery& e, const std::vector<AttrId>& attrs,
                         const std::vector<std::uint32_t>& cells) {
  ResultSet rs;
  rs.schema = e.q->query().return_vars;
  std::vector<std::size_t> cols;
  for (const auto& v : rs.schema) {
    auto it = std::find(attrs.begin(), attrs.end(), e.q->variable_id(v));
    if (it == attrs.end()) throw InvariantViolation("return variable " + v + " missing from join output");
    cols.push_back(static_cast<std::size_t>(it - attrs.begin()));
  }
  const std::size_t k = attrs.size();
  if (k == 0) return rs;
  // Ids follow value order, so sorting ids sorts values.
  std::vector<std::vector<std::uint32_t>> rows;
  for (std::size_t i = 0; i * k < cells.size(); ++i) {
    std::vector<std::uint32_t> v;
    for (auto c : cols) v.push_back(cells[i * k + c]);
    rows.push_back(std::move(v));
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  for (const auto& r : rows) {
    std::vector<Value> out;
    for (auto id : r) out.push_back(e.dict->value(id));
    rs.rows.push_back(std::move(out));
  }
  return rs;
}

}  // namespace detail
}  // namespace cmcq
