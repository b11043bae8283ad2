#include "cmcq/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cmcq/error.hpp"

namespace cmcq {
namespace {

constexpr std::array<std::pair<Family, std::string_view>, 5> kFamilies{{
    {Family::DescendantFan, "DescendantFan"},
    {Family::ChildFan, "ChildFan"},
    {Family::MixedFan, "MixedFan"},
    {Family::MixedChain, "MixedChain"},
    {Family::TriangleLike, "TriangleLike"},
}};

// Uniform in [0, k). Plain modulo keeps output identical across standard
// libraries, which distributions do not promise.
std::size_t pick(std::mt19937_64& rng, std::size_t k) { return k == 0 ? 0 : static_cast<std::size_t>(rng() % k); }
bool coin(std::mt19937_64& rng, unsigned percent) { return rng() % 100 < percent; }

void shuffle_siblings(LabeledTree& t, std::uint64_t seed) {
  if (seed == 0) return;
  std::mt19937_64 rng(seed);
  for (auto& n : t.nodes)
    for (std::size_t i = n.children.size(); i > 1; --i) std::swap(n.children[i - 1], n.children[pick(rng, i)]);
}

std::vector<std::vector<Value>> column(const std::string& prefix, std::size_t n) {
  std::vector<std::vector<Value>> rows;
  for (std::size_t i = 1; i <= n; ++i) rows.push_back({prefix + std::to_string(i)});
  return rows;
}

void add_domain(Instance& inst, const std::string& var, std::size_t n) {
  std::string up = var;
  up[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(up[0])));
  inst.relations.emplace(var + ".csv", make_relation(up, {var}, column(var, n)));
}

Instance descendant_fan(std::size_t n) {
  Instance inst;
  LabeledTree t;
  std::size_t last = t.add_root("a1");
  for (std::size_t i = 2; i <= n; ++i) last = t.add_child(last, "a" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) t.add_child(last, "b" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) t.add_child(last, "c" + std::to_string(i));
  inst.trees.emplace("tree.xml", std::move(t));
  for (const char* v : {"a", "b", "c"}) add_domain(inst, v, n);
  inst.query_text =
      "REL A(a) FROM \"a.csv\";\nREL B(b) FROM \"b.csv\";\nREL C(c) FROM \"c.csv\";\n"
      "TREE T FROM \"tree.xml\" MATCH :a[//:b]//:c;\nRETURN a, b, c;\n";
  inst.expected_rows = static_cast<std::uint64_t>(n) * n * n;
  return inst;
}

Instance child_fan(std::size_t n) {
  Instance inst;
  LabeledTree t;
  const std::size_t a = t.add_root("a1");
  for (std::size_t i = 1; i <= n; ++i) t.add_child(t.add_child(a, "b" + std::to_string(i)), "c" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) t.add_child(a, "d" + std::to_string(i));
  inst.trees.emplace("tree.xml", std::move(t));
  add_domain(inst, "a", 1);
  for (const char* v : {"b", "c", "d"}) add_domain(inst, v, n);
  inst.query_text =
      "REL A(a) FROM \"a.csv\";\nREL B(b) FROM \"b.csv\";\nREL C(c) FROM \"c.csv\";\nREL D(d) FROM \"d.csv\";\n"
      "TREE T FROM \"tree.xml\" MATCH :a[:b/:c]/:d;\nRETURN a, b, c, d;\n";
  inst.expected_rows = static_cast<std::uint64_t>(n) * n;
  return inst;
}

const char* kMixedQuery =
    "REL A(a) FROM \"a.csv\";\nREL B(b) FROM \"b.csv\";\nREL C(c) FROM \"c.csv\";\nREL D(d) FROM \"d.csv\";\n"
    "TREE T FROM \"tree.xml\" MATCH :a[:b]/:c//:d;\nRETURN a, b, c, d;\n";

// One a with n b-children and n c-children, each c over its own d.
Instance mixed_fan(std::size_t n) {
  Instance inst;
  LabeledTree t;
  const std::size_t a = t.add_root("a1");
  for (std::size_t i = 1; i <= n; ++i) t.add_child(a, "b" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) t.add_child(t.add_child(a, "c" + std::to_string(i)), "d" + std::to_string(i));
  inst.trees.emplace("tree.xml", std::move(t));
  add_domain(inst, "a", 1);
  for (const char* v : {"b", "c", "d"}) add_domain(inst, v, n);
  inst.query_text = kMixedQuery;
  inst.expected_rows = static_cast<std::uint64_t>(n) * n;
  return inst;
}

// a_i has children b_i and c_i; c_i carries a_{i+1}; c_n carries all d's.
Instance mixed_chain(std::size_t n) {
  Instance inst;
  LabeledTree t;
  std::size_t a = t.add_root("a1");
  for (std::size_t i = 1; i <= n; ++i) {
    t.add_child(a, "b" + std::to_string(i));
    const std::size_t c = t.add_child(a, "c" + std::to_string(i));
    if (i < n) {
      a = t.add_child(c, "a" + std::to_string(i + 1));
    } else {
      for (std::size_t j = 1; j <= n; ++j) t.add_child(c, "d" + std::to_string(j));
    }
  }
  inst.trees.emplace("tree.xml", std::move(t));
  for (const char* v : {"a", "b", "c", "d"}) add_domain(inst, v, n);
  inst.query_text = kMixedQuery;
  inst.expected_rows = static_cast<std::uint64_t>(n) * n;
  return inst;
}

// Typed encoding: element b wraps each b-value, element c each c-value, so
// each root-to-leaf path matches n times while the pattern matches n^2.
Instance triangle_like(std::size_t n) {
  Instance inst;
  LabeledTree t;
  const std::size_t a = t.add_root("a0");
  for (std::size_t i = 0; i < n; ++i) t.add_child(t.add_child(a, "b"), "b" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) t.add_child(t.add_child(a, "c"), "c" + std::to_string(i));
  inst.trees.emplace("tree.xml", std::move(t));
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  std::vector<std::vector<Value>> rows;
  for (std::size_t i = 0; i < side && rows.size() < n; ++i)
    for (std::size_t j = 0; j < side && rows.size() < n; ++j)
      rows.push_back({"b" + std::to_string(i), "c" + std::to_string(j)});
  inst.expected_rows = rows.size();
  inst.relations.emplace("r1.csv", make_relation("R1", {"b", "c"}, std::move(rows)));
  inst.query_text = "REL R1(b, c) FROM \"r1.csv\";\nTREE T FROM \"tree.xml\" MATCH :a[b/:b]/c/:c;\nRETURN a, b, c;\n";
  return inst;
}

std::string statement_name(const std::string& prefix, const char* suffix) { return prefix + suffix; }

void rel_or_path(std::ostringstream& out, const std::string& name, const std::vector<std::string>& vars,
                 bool as_path) {
  if (as_path) {
    out << "TREE " << name << " FROM \"" << name << ".xml\" MATCH ";
    for (std::size_t i = 0; i < vars.size(); ++i) out << (i ? "/:" : ":") << vars[i];
    out << ";\n";
    return;
  }
  out << "REL " << name << "(";
  for (std::size_t i = 0; i < vars.size(); ++i) out << (i ? ", " : "") << vars[i];
  out << ") FROM \"" << name << ".csv\";\n";
}

using LiteralPair = std::pair<std::string, std::string>;

LiteralPair literal_pair(std::size_t clause, const Literal& l) {
  const std::string suffix = std::to_string(clause + 1) + "_" + std::to_string(l.variable);
  return l.positive ? LiteralPair{"x" + suffix, "a" + suffix} : LiteralPair{"y" + suffix, "b" + suffix};
}

std::vector<std::string> flatten(std::initializer_list<LiteralPair> pairs) {
  std::vector<std::string> out;
  for (const auto& [v, w] : pairs) {
    out.push_back(v);
    out.push_back(w);
  }
  return out;
}

Clause3 sorted_clause(Clause3 c) {
  std::sort(c.begin(), c.end());
  return c;
}

}  // namespace

std::string_view to_string(Family f) {
  for (const auto& [k, name] : kFamilies)
    if (k == f) return name;
  throw UnsupportedKind("unknown family");
}

Family parse_family(std::string_view name) {
  for (const auto& [k, n] : kFamilies)
    if (n == name) return k;
  throw UnsupportedKind("unknown instance family '" + std::string(name) + "'");
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> all = [] {
    std::vector<Family> v;
    for (const auto& [k, n] : kFamilies) v.push_back(k);
    return v;
  }();
  return all;
}

Instance gen_family(Family kind, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UnsupportedKind("family scale must be at least 1");
  Instance inst;
  switch (kind) {
    case Family::DescendantFan: inst = descendant_fan(n); break;
    case Family::ChildFan: inst = child_fan(n); break;
    case Family::MixedFan: inst = mixed_fan(n); break;
    case Family::MixedChain: inst = mixed_chain(n); break;
    case Family::TriangleLike: inst = triangle_like(n); break;
    default: throw UnsupportedKind("unknown instance family");
  }
  inst.name = std::string(to_string(kind)) + "-" + std::to_string(n);
  for (auto& [src, t] : inst.trees) shuffle_siblings(t, seed);
  return inst;
}

Instance two_by_two_instance() {
  Instance inst;
  inst.name = "two-by-two";
  LabeledTree t;
  const std::size_t a = t.add_root("a0");
  for (int i = 0; i < 4; ++i) t.add_child(a, "b" + std::to_string(i));
  for (int i = 0; i < 4; ++i) t.add_child(a, "c" + std::to_string(i));
  inst.trees.emplace("tree.xml", std::move(t));
  inst.relations.emplace("r1.csv", make_relation("R1", {"b", "c"}, {{"b0", "c0"}, {"b0", "c1"}, {"b1", "c0"}, {"b1", "c1"}}));
  inst.query_text = "REL R1(b, c) FROM \"r1.csv\";\nTREE T FROM \"tree.xml\" MATCH :a[:b]/:c;\nRETURN a, b, c;\n";
  inst.expected_rows = 4;
  return inst;
}

Instance medical_instance() {
  Instance inst;
  inst.name = "medical";
  inst.relations.emplace("patients.csv",
                         make_relation("Patients", {"pid", "status"}, {{"p1", "single"}, {"p2", "married"}}));
  inst.relations.emplace("single.csv", make_relation("Single", {"status"}, {{"single"}}));
  inst.trees.emplace("reports.json", parse_tree_json(R"([
  {"patient": "p1", "flag": "abnormal"},
  {"patient": "p2", "flag": "abnormal"}
])"));
  inst.query_text =
      "REL P(pid, status) FROM \"patients.csv\";\nREL S(status) FROM \"single.csv\";\n"
      "TREE D FROM \"reports.json\" MATCH \"#\"[patient/:pid]/flag/abnormal;\nRETURN pid;\n";
  inst.expected_rows = 1;
  return inst;
}

Database to_database(const Instance& inst) {
  Database db;
  db.relations = inst.relations;
  for (const auto& [src, t] : inst.trees) db.trees.emplace(src, dewey_encode(t));
  return db;
}

void write_instance(const Instance& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << text;
  };
  for (const auto& [src, r] : inst.relations) write(src, relation_to_csv(r));
  for (const auto& [src, t] : inst.trees) {
    if (std::filesystem::path(src).extension() == ".json")
      throw UnsupportedKind("writing JSON trees is not supported: " + src);
    write(src, tree_to_xml(t));
  }
  write("query.cmcq", inst.query_text);
}

std::uint64_t instance_scale(const Instance& inst) {
  std::uint64_t n = 0;
  for (const auto& [src, r] : inst.relations) n = std::max<std::uint64_t>(n, r.rows.size());
  for (const auto& [src, t] : inst.trees) {
    std::map<Value, std::uint64_t> freq;
    for (const auto& node : t.nodes) n = std::max(n, ++freq[node.label]);
  }
  return n;
}

std::string gadget_text(GadgetKind kind, const std::vector<std::string>& names, const std::string& prefix,
                        bool relations_as_paths) {
  const std::size_t want = kind == GadgetKind::K1 ? 4 : 6;
  if (names.size() != want)
    throw ArityMismatch(std::string(kind == GadgetKind::K1 ? "K1" : "K2") + " takes " + std::to_string(want) +
                        " variables, got " + std::to_string(names.size()));
  std::ostringstream out;
  const auto& A = names[0];
  const auto& B = names[1];
  const auto& C = names[2];
  const auto& D = names[3];
  if (kind == GadgetKind::K1) {
    // A[C]/D[B]
    out << "TREE " << prefix << "T FROM \"" << prefix << "T.xml\" MATCH :" << A << "[:" << C << "]/:" << D << "/:"
        << B << ";\n";
    rel_or_path(out, statement_name(prefix, "R1"), {B, C}, relations_as_paths);
    rel_or_path(out, statement_name(prefix, "R2"), {B, D}, relations_as_paths);
  } else {
    const auto& E = names[4];
    const auto& F = names[5];
    // D[A]/F/B//C/E
    out << "TREE " << prefix << "T FROM \"" << prefix << "T.xml\" MATCH :" << D << "[:" << A << "]/:" << F << "/:"
        << B << "//:" << C << "/:" << E << ";\n";
    rel_or_path(out, statement_name(prefix, "R1"), {A, F}, relations_as_paths);
    rel_or_path(out, statement_name(prefix, "R2"), {A, C, E}, relations_as_paths);
    rel_or_path(out, statement_name(prefix, "R3"), {B, C, E}, relations_as_paths);
  }
  return out.str();
}

Query gadget(GadgetKind kind, const std::vector<std::string>& names) {
  std::string text = gadget_text(kind, names, "G");
  text += "RETURN ";
  for (std::size_t i = 0; i < names.size(); ++i) text += (i ? ", " : "") + names[i];
  return parse_query(text + ";\n");
}

std::string reduction_text(const std::vector<Clause3>& clauses, bool relations_as_paths) {
  if (clauses.size() < 2)
    throw TooFewClauses("the reduction needs at least two clauses, got " + std::to_string(clauses.size()));
  for (const auto& c : clauses)
    if (c[0].variable == c[1].variable || c[0].variable == c[2].variable || c[1].variable == c[2].variable)
      throw UnsupportedKind("clause literals must use three distinct variables");

  std::ostringstream out;
  std::set<std::string> vars;
  int counter = 0;
  auto k2 = [&](const LiteralPair& l, const LiteralPair& u, const LiteralPair& w) {
    const auto names = flatten({l, u, w});
    vars.insert(names.begin(), names.end());
    out << gadget_text(GadgetKind::K2, names, "G" + std::to_string(counter++), relations_as_paths);
  };
  auto k1 = [&](const LiteralPair& l, const LiteralPair& u) {
    const auto names = flatten({l, u});
    vars.insert(names.begin(), names.end());
    out << gadget_text(GadgetKind::K1, names, "G" + std::to_string(counter++), relations_as_paths);
  };

  // Within a clause exactly one literal holds.
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    const auto L0 = literal_pair(i, clauses[i][0]);
    const auto L1 = literal_pair(i, clauses[i][1]);
    const auto L2 = literal_pair(i, clauses[i][2]);
    k2(L0, L1, L2);
    k2(L1, L0, L2);
    k2(L2, L0, L1);
  }
  // A variable and its negation are never both true ...
  struct Opposite {
    std::size_t i, j;
    std::size_t li, lj;  // literal index inside clause i (positive) and j (negative)
  };
  std::vector<Opposite> opposites;
  for (std::size_t i = 0; i < clauses.size(); ++i)
    for (std::size_t j = 0; j < clauses.size(); ++j) {
      if (i == j) continue;
      for (std::size_t li = 0; li < 3; ++li)
        for (std::size_t lj = 0; lj < 3; ++lj)
          if (clauses[i][li].positive && !clauses[j][lj].positive &&
              clauses[i][li].variable == clauses[j][lj].variable)
            opposites.push_back({i, j, li, lj});
    }
  for (const auto& o : opposites) k1(literal_pair(o.i, clauses[o.i][o.li]), literal_pair(o.j, clauses[o.j][o.lj]));
  // ... and never both false.
  for (const auto& o : opposites) {
    std::vector<LiteralPair> pi, pj;
    for (std::size_t l = 0; l < 3; ++l) {
      if (l != o.li) pi.push_back(literal_pair(o.i, clauses[o.i][l]));
      if (l != o.lj) pj.push_back(literal_pair(o.j, clauses[o.j][l]));
    }
    k2(pi[0], pj[0], pj[1]);
    k2(pi[1], pj[0], pj[1]);
    k2(pj[0], pi[0], pi[1]);
    k2(pj[1], pi[0], pi[1]);
  }

  out << "RETURN ";
  bool first = true;
  for (const auto& v : vars) {
    out << (first ? "" : ", ") << v;
    first = false;
  }
  out << ";\n";
  return out.str();
}

Query reduce_1in3sat(const std::vector<Clause3>& clauses, bool relations_as_paths) {
  return parse_query(reduction_text(clauses, relations_as_paths));
}

bool one_in_three_satisfiable(const std::vector<Clause3>& clauses) {
  int vars = 0;
  for (const auto& c : clauses)
    for (const auto& l : c) vars = std::max(vars, l.variable);
  if (vars > 24) throw UnsupportedKind("brute force is limited to 24 variables");
  for (std::uint32_t mask = 0; mask < (1u << vars); ++mask) {
    bool ok = true;
    for (const auto& c : clauses) {
      int truths = 0;
      for (const auto& l : c) truths += (((mask >> (l.variable - 1)) & 1u) != 0) == l.positive;
      if (truths != 1) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

std::vector<std::vector<Clause3>> enumerate_1in3sat(int m, int max_vars) {
  std::vector<Clause3> all;
  for (int a = 1; a <= max_vars; ++a)
    for (int b = a + 1; b <= max_vars; ++b)
      for (int c = b + 1; c <= max_vars; ++c)
        for (int signs = 0; signs < 8; ++signs)
          all.push_back({Literal{a, (signs & 1) != 0}, Literal{b, (signs & 2) != 0}, Literal{c, (signs & 4) != 0}});

  std::vector<int> perm(static_cast<std::size_t>(max_vars));
  auto canonical = [&](const std::vector<Clause3>& f) {
    std::vector<Clause3> best;
    std::iota(perm.begin(), perm.end(), 1);
    do {
      std::vector<Clause3> g;
      for (const auto& c : f) {
        Clause3 r = c;
        for (auto& l : r) l.variable = perm[static_cast<std::size_t>(l.variable - 1)];
        g.push_back(sorted_clause(r));
      }
      std::sort(g.begin(), g.end());
      if (best.empty() || g < best) best = std::move(g);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  };

  std::set<std::vector<Clause3>> seen;
  std::vector<std::size_t> idx(static_cast<std::size_t>(m));
  auto rec = [&](auto&& self, std::size_t depth, std::size_t from) -> void {
    if (depth == idx.size()) {
      std::vector<Clause3> f;
      for (auto i : idx) f.push_back(all[i]);
      seen.insert(canonical(f));
      return;
    }
    for (std::size_t i = from; i < all.size(); ++i) {
      idx[depth] = i;
      self(self, depth + 1, i + 1);
    }
  };
  if (m > 0) rec(rec, 0, 0);
  return {seen.begin(), seen.end()};
}

namespace {

struct RandomPattern {
  std::vector<std::size_t> parent;  // parent[0] unused
  std::vector<Axis> axis;
  std::vector<std::string> test;
};

std::string pattern_text(const RandomPattern& p) {
  std::vector<std::vector<std::size_t>> children(p.parent.size());
  for (std::size_t i = 1; i < p.parent.size(); ++i) children[p.parent[i]].push_back(i);
  auto rec = [&](auto&& self, std::size_t n) -> std::string {
    std::string s = p.test[n];
    const auto& ch = children[n];
    for (std::size_t k = 0; k + 1 < ch.size(); ++k)
      s += "[" + std::string(p.axis[ch[k]] == Axis::Descendant ? "//" : "") + self(self, ch[k]) + "]";
    if (!ch.empty()) s += (p.axis[ch.back()] == Axis::Descendant ? "//" : "/") + self(self, ch.back());
    return s;
  };
  return rec(rec, 0);
}

RandomPattern random_shape(std::mt19937_64& rng, std::size_t nodes, std::size_t max_desc) {
  RandomPattern p;
  p.parent.assign(nodes, 0);
  p.axis.assign(nodes, Axis::None);
  p.test.assign(nodes, "");
  std::size_t desc = 0;
  for (std::size_t i = 1; i < nodes; ++i) {
    p.parent[i] = pick(rng, i);
    const bool d = desc < max_desc && coin(rng, 50);
    desc += d;
    p.axis[i] = d ? Axis::Descendant : Axis::Child;
  }
  return p;
}

}  // namespace

Instance random_instance(std::uint64_t seed, const RandomShape& shape) {
  std::mt19937_64 rng(seed);
  auto label = [&] { return "l" + std::to_string(pick(rng, shape.labels)); };
  auto var = [&] { return "v" + std::to_string(pick(rng, shape.variables)); };

  for (;;) {
    Instance inst;
    inst.name = "random-" + std::to_string(seed);
    std::ostringstream q;
    std::set<std::string> bound_vars;
    double product = 1;

    const std::size_t relations = pick(rng, shape.max_relations + 1);
    for (std::size_t r = 0; r < relations; ++r) {
      const std::size_t arity = 1 + pick(rng, 2);
      std::vector<std::string> attrs;
      for (std::size_t c = 0; c < arity; ++c) attrs.push_back(var());
      std::vector<std::vector<Value>> rows;
      const std::size_t n = pick(rng, shape.max_relation_rows + 1);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<Value> row;
        for (std::size_t c = 0; c < arity; ++c) row.push_back(label());
        rows.push_back(std::move(row));
      }
      const std::string name = "R" + std::to_string(r);
      const std::string src = "r" + std::to_string(r) + ".csv";
      std::vector<std::string> columns;
      for (std::size_t c = 0; c < arity; ++c) columns.push_back("c" + std::to_string(c));
      Relation rel = make_relation(name, columns, std::move(rows));
      product *= static_cast<double>(std::max<std::size_t>(rel.rows.size(), 1));
      inst.relations.emplace(src, std::move(rel));
      q << "REL " << name << "(";
      for (std::size_t c = 0; c < arity; ++c) q << (c ? ", " : "") << attrs[c];
      q << ") FROM \"" << src << "\";\n";
      bound_vars.insert(attrs.begin(), attrs.end());
    }

    const std::size_t trees = 1 + pick(rng, shape.max_trees);
    for (std::size_t ti = 0; ti < trees; ++ti) {
      LabeledTree t;
      const std::size_t size = 1 + pick(rng, shape.max_tree_nodes);
      t.add_root(label());
      for (std::size_t i = 1; i < size; ++i) t.add_child(pick(rng, i), label());
      std::map<Value, std::size_t> freq;
      for (const auto& n : t.nodes) ++freq[n.label];

      RandomPattern p = random_shape(rng, 1 + pick(rng, shape.max_pattern_nodes), shape.max_descendant_axes);
      for (auto& test : p.test) {
        const auto roll = pick(rng, 4);
        std::size_t table = size;
        if (roll == 0) {
          test = label();
        } else if (roll == 1) {
          const std::string l = label(), v = var();
          test = l + ":" + v;
          bound_vars.insert(v);
        } else {
          const std::string v = var();
          test = ":" + v;
          bound_vars.insert(v);
        }
        if (roll <= 1) table = freq[test.substr(0, test.find(':'))];
        product *= static_cast<double>(std::max<std::size_t>(table, 1));
      }
      const std::string src = "t" + std::to_string(ti) + ".xml";
      inst.trees.emplace(src, std::move(t));
      q << "TREE T" << ti << " FROM \"" << src << "\" MATCH " << pattern_text(p) << ";\n";
    }
    if (bound_vars.empty() || product > shape.max_node_table_product) continue;

    std::vector<std::string> ret;
    for (const auto& v : bound_vars)
      if (coin(rng, 60)) ret.push_back(v);
    if (ret.empty()) ret.push_back(*std::next(bound_vars.begin(), static_cast<std::ptrdiff_t>(pick(rng, bound_vars.size()))));
    q << "RETURN ";
    for (std::size_t i = 0; i < ret.size(); ++i) q << (i ? ", " : "") << ret[i];
    q << ";\n";
    inst.query_text = q.str();
    return inst;
  }
}

Query random_bound_query(std::uint64_t seed, std::size_t max_nodes, std::size_t max_descendant) {
  std::mt19937_64 rng(seed);
  RandomPattern p = random_shape(rng, 1 + pick(rng, max_nodes), max_descendant);
  std::set<std::string> vars;
  for (std::size_t i = 0; i < p.test.size(); ++i) {
    if (i > 0 && coin(rng, 15)) {
      p.test[i] = "k" + std::to_string(pick(rng, 3));
      continue;
    }
    const std::string v = "v" + std::to_string(pick(rng, p.test.size() + 1));
    p.test[i] = ":" + v;
    vars.insert(v);
  }
  const std::vector<std::string> pool(vars.begin(), vars.end());
  std::ostringstream q;
  const std::size_t relations = pick(rng, 4);
  for (std::size_t r = 0; r < relations; ++r) {
    std::vector<std::string> attrs;
    const std::size_t arity = 1 + pick(rng, std::min<std::size_t>(3, pool.size()));
    while (attrs.size() < arity) {
      const auto& v = pool[pick(rng, pool.size())];
      if (std::find(attrs.begin(), attrs.end(), v) == attrs.end()) attrs.push_back(v);
    }
    q << "REL R" << r << "(";
    for (std::size_t c = 0; c < attrs.size(); ++c) q << (c ? ", " : "") << attrs[c];
    q << ") FROM \"r" << r << ".csv\";\n";
  }
  q << "TREE T FROM \"t.xml\" MATCH " << pattern_text(p) << ";\nRETURN ";
  for (std::size_t i = 0; i < pool.size(); ++i) q << (i ? ", " : "") << pool[i];
  q << ";\n";
  return parse_query(q.str());
}

}  // namespace cmcq
