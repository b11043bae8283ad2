#include <doctest.h>

#include <algorithm>

#include "cmcq/bound.hpp"
#include "cmcq/engine.hpp"
#include "cmcq/error.hpp"
#include "cmcq/lp.hpp"
#include "cmcq/testkit.hpp"

using namespace cmcq;

namespace {

ValidatedQuery vq(const std::string& text) { return validate(parse_query(text)); }
PatternNode pattern(const std::string& m) { return parse_query("TREE T FROM \"t\" MATCH " + m + "; RETURN x").trees[0].pattern; }

Inequality labels(std::initializer_list<const char*> vars) {
  Inequality q;
  for (const char* v : vars) q.vars.insert(LPVar::label(v));
  return q;
}

std::set<LPVar> objective(std::initializer_list<const char*> vars) { return labels(vars).vars; }

std::size_t descendant_edges(const PatternNode& p) {
  std::size_t n = 0;
  for_each_node(p, [&](const PatternNode& v) { n += v.axis == Axis::Descendant; });
  return n;
}

// Checks every suite inequality at the witness.
bool witness_feasible(const Bound& b) {
  auto holds = [&](const Inequality& q) {
    Rational s(0);
    for (const auto& v : q.vars) {
      auto it = b.witness.find(v);
      if (it != b.witness.end()) s += it->second;
    }
    return s <= 1;
  };
  return std::all_of(b.suite.relations.begin(), b.suite.relations.end(), holds) &&
         std::all_of(b.suite.compensations.begin(), b.suite.compensations.end(), holds);
}

// Largest input table the bound speaks about: relations and the node table
// of every pattern node (a variable test's table is the whole tree).
std::uint64_t table_scale(const Query& q, const Database& db) {
  std::uint64_t n = 0;
  for (const auto& r : q.relations) n = std::max<std::uint64_t>(n, db.relations.at(r.source).rows.size());
  for (const auto& t : q.trees)
    for_each_node(t.pattern, [&](const PatternNode& v) {
      n = std::max<std::uint64_t>(n, node_table(db.trees.at(t.source), v.test).size());
    });
  return n;
}

}  // namespace

TEST_CASE("relation_inequalities") {
  const auto tri = relation_inequalities(
      vq("REL R1(a,b) FROM \"1\"; REL R2(b,c) FROM \"2\"; REL R3(a,c) FROM \"3\"; RETURN a"));
  CHECK(tri == std::vector<Inequality>{labels({"a", "b"}), labels({"b", "c"}), labels({"a", "c"})});
  CHECK(relation_inequalities(vq("TREE T FROM \"t\" MATCH :a; RETURN a")).empty());
  CHECK(relation_inequalities(vq("REL R(a,a) FROM \"r\"; RETURN a")) == std::vector<Inequality>{labels({"a"})});
}

TEST_CASE("pc_path_inequalities") {
  const auto branching = pc_path_inequalities(pattern(":a[:b/:c]/:d"), BoundMode::labels_only());
  CHECK(branching == std::vector<Inequality>{labels({"a", "b", "c"}), labels({"a", "d"})});
  CHECK(lp_max(objective({"a", "b", "c", "d"}), branching).value == 2);

  CHECK(pc_path_inequalities(pattern(":a"), BoundMode::labels_only()) == std::vector<Inequality>{labels({"a"})});

  const auto pos = pc_path_inequalities(pattern(":a[:b]/:c"), BoundMode::all_positions());
  Inequality ab = labels({"a", "b"}), ac = labels({"a", "c"});
  ab.vars.insert({LPVar::position(0), LPVar::position(1)});
  ac.vars.insert({LPVar::position(0), LPVar::position(2)});
  CHECK(pos == std::vector<Inequality>{ab, ac});
  std::set<LPVar> all = objective({"a", "b", "c"});
  for (NodeId i : {0, 1, 2}) all.insert(LPVar::position(i));
  CHECK(lp_max(all, pos).value == 2);

  CHECK_THROWS_AS(pc_path_inequalities(pattern(":a//:b"), BoundMode::labels_only()), NotCanonical);
}

TEST_CASE("convert") {
  CHECK(convert(pattern(":a//:b"), 1) == pattern(":a/:b"));
  CHECK(convert(pattern(":a[:b]//:c"), 2) == pattern(":a[:b]/:c"));
  CHECK_THROWS_AS(convert(pattern(":a/:b"), 1), NotDescendant);
}

TEST_CASE("split") {
  const SplitResult s = split(pattern(":a[:b]/:c//:d"), 3);
  CHECK(s.upper == pattern(":a[:b]/:c"));
  CHECK(s.lower.test.variable == "d");
  CHECK(s.lower.axis == Axis::None);
  CHECK(s.compensations == std::vector<Inequality>{labels({"a", "b", "c"})});

  const SplitResult t = split(pattern(":a//:b"), 1);
  CHECK(node_count(t.upper) == 1);
  CHECK(t.compensations.empty());

  // Two leaves off the root-to-c path, one compensation each.
  const SplitResult u = split(pattern(":a[:b][:c]/:d//:e"), 4);
  CHECK(u.compensations == std::vector<Inequality>{labels({"a", "b", "d"}), labels({"a", "c", "d"})});

  CHECK_THROWS_AS(split(pattern(":a/:b"), 1), NotDescendant);
}

TEST_CASE("highest descendant edge: smallest depth, then leftmost") {
  CHECK(highest_descendant_edge(pattern(":a/:b")) == std::nullopt);
  CHECK(highest_descendant_edge(pattern(":a[:b//:c]//:d")) == 3);
  CHECK(highest_descendant_edge(pattern(":a[//:b]//:c")) == 1);
}

TEST_CASE("canonical_suites") {
  BoundOptions off;
  off.opt1 = off.opt2 = false;
  const PatternNode three = pattern(":a[//:b]//:c//:d");
  CHECK(canonical_suites(three, {}, {}, off).suites.size() == 8);
  CHECK(canonical_suites(pattern(":a[:b]/:c"), {}, {}, off).suites.size() == 1);
  for (const auto& s : canonical_suites(three, {}, {}, off).suites) CHECK(s.canonical());

  BoundOptions on;
  const auto pruned = canonical_suites(three, {}, {}, on);
  CHECK(pruned.suites.size() < 8);
  CHECK(pruned.stats.suites_pruned_opt1 + pruned.stats.suites_pruned_opt2 > 0);
}

TEST_CASE("property: 2^k suites without optimizations") {
  BoundOptions off;
  off.opt1 = off.opt2 = false;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; checked < 100 && seed < 1000; ++seed) {
    const Query q = random_bound_query(seed, 8, 5);
    const PatternNode& p = q.trees[0].pattern;
    const std::size_t k = descendant_edges(p);
    if (k > 5) continue;
    CAPTURE(print_pattern(p));
    CHECK(canonical_suites(p, {}, {}, off).suites.size() == (std::size_t{1} << k));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("lp_max") {
  const auto tri = std::vector<Inequality>{labels({"a", "b"}), labels({"b", "c"}), labels({"a", "c"})};
  const LpResult t = lp_max(objective({"a", "b", "c"}), tri);
  CHECK(t.value == Rational(3, 2));
  for (const char* v : {"a", "b", "c"}) CHECK(t.witness.at(LPVar::label(v)) == Rational(1, 2));

  CHECK(lp_max(objective({"a", "b", "c"}), {}).value == 3);
  CHECK(lp_max(objective({"a", "b", "c", "d"}), {labels({"a", "b"}), labels({"a", "c", "d"})}).value == 2);
}

TEST_CASE("solve_packing_lp: exact optimum on odd cycles and stars") {
  // C5: every vertex 1/2 → 5/2.
  std::vector<std::vector<int>> c5;
  for (int i = 0; i < 5; ++i) c5.push_back({i, (i + 1) % 5});
  const PackingSolution s = solve_packing_lp(5, std::vector<bool>(5, true), c5);
  CHECK(s.value == Rational(5, 2));
  // Uncovered variables sit at their box bound; non-objective ones add nothing.
  const PackingSolution u = solve_packing_lp(3, {true, true, false}, {{0, 2}});
  CHECK(u.value == 2);
}

TEST_CASE("compute_bound regressions") {
  const auto tbt = vq("REL R1(b,c) FROM \"r1\"; TREE T FROM \"t\" MATCH :a[:b]/:c; RETURN a,b,c");
  CHECK(compute_bound(tbt, BoundMode::all_positions()).exponent == 2);
  CHECK(compute_bound(tbt, BoundMode::branch_positions()).exponent == Rational(3, 2));
  CHECK(compute_bound(tbt, BoundMode::labels_only()).exponent == Rational(3, 2));

  const std::string mixed = "TREE T FROM \"t\" MATCH :a[:b]/:c//:d;";
  CHECK(compute_bound(vq(mixed + " RETURN a"), BoundMode::labels_only()).exponent == 2);
  CHECK(compute_bound(vq("REL R1(b,c,d) FROM \"r\"; " + mixed + " RETURN a"), BoundMode::labels_only()).exponent == 2);
  CHECK(compute_bound(vq("REL R3(b,d) FROM \"r3\"; REL R4(a,c,d) FROM \"r4\"; " + mixed + " RETURN a"),
                      BoundMode::labels_only())
            .exponent == 2);
  CHECK(compute_bound(vq("TREE T FROM \"t\" MATCH :a[//:b]//:c; RETURN a"), BoundMode::labels_only()).exponent == 3);

  // The merge root is not part of the objective: two disjoint single nodes give 2.
  const auto two = vq("TREE A FROM \"a\" MATCH :x; TREE B FROM \"b\" MATCH :y; RETURN x,y");
  CHECK(compute_bound(two, BoundMode::labels_only()).exponent == 2);

  const auto paths = root_to_leaf_paths(tbt.query().trees[0].pattern);
  CHECK(compute_bound(tbt, BoundMode::single_path(paths[0])).exponent >= 1);
  CHECK(BoundMode::single_path(paths[0]).name() == "rho4");
}

TEST_CASE("property: mode monotonicity, determinism and witness feasibility") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const ValidatedQuery q = validate(random_bound_query(seed, 7, 4));
    CAPTURE(print_query(q.query()));
    const Bound r1 = compute_bound(q, BoundMode::all_positions());
    const Bound r2 = compute_bound(q, BoundMode::branch_positions());
    const Bound r3 = compute_bound(q, BoundMode::labels_only());
    CHECK(r1.exponent >= r2.exponent);
    CHECK(r2.exponent >= r3.exponent);
    CHECK(r3.exponent >= 0);
    CHECK(witness_feasible(r1));
    CHECK(witness_feasible(r3));
    const Bound again = compute_bound(q, BoundMode::labels_only());
    CHECK(again.exponent == r3.exponent);
    CHECK(again.witness == r3.witness);
    CHECK(again.suite.to_string() == r3.suite.to_string());
  }
}

TEST_CASE("property: search strategies agree") {
  BoundOptions ex, bb;
  ex.search = BoundOptions::Search::Exhaustive;
  bb.search = BoundOptions::Search::BranchAndBound;
  BoundOptions serial = ex;
  serial.parallel = false;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const ValidatedQuery q = validate(random_bound_query(seed));
    CAPTURE(seed);
    const Rational a = compute_bound(q, BoundMode::labels_only(), ex).exponent;
    CHECK(compute_bound(q, BoundMode::labels_only(), bb).exponent == a);
    CHECK(compute_bound(q, BoundMode::labels_only(), serial).exponent == a);
  }
}

TEST_CASE("property: soundness of N^rho3 on random instances") {
  std::size_t nonempty = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Instance inst = random_instance(seed);
    CAPTURE(inst.query_text);
    const ValidatedQuery q = validate(parse_query(inst.query_text));
    const Database db = to_database(inst);
    const Evaluation ev = baseline(Baseline::Naive, q, db);
    const Rational rho = compute_bound(q, BoundMode::labels_only()).exponent;
    CHECK(mpz_class(ev.result.rows.size()) <= size_bound(table_scale(q.query(), db), rho));
    nonempty += !ev.result.rows.empty();
  }
  CHECK(nonempty > 20);
}

TEST_CASE("property: soundness on testkit families at N in {2,4,8}") {
  for (Family f : all_families())
    for (std::size_t n : {2, 4, 8}) {
      const Instance inst = gen_family(f, n);
      const ValidatedQuery q = validate(parse_query(inst.query_text));
      const Evaluation ev = baseline(Baseline::Naive, q, to_database(inst));
      CAPTURE(inst.name);
      CHECK(ev.result.rows.size() == inst.expected_rows);
      CHECK(mpz_class(ev.result.rows.size()) <=
            size_bound(instance_scale(inst), compute_bound(q, BoundMode::labels_only()).exponent));
    }
}

TEST_CASE("size_bound is an exact ceiling") {
  CHECK(size_bound(4, Rational(3, 2)) == 8);
  CHECK(size_bound(2, Rational(3, 2)) == 3);  // 2.828...
  CHECK(size_bound(10, 0) == 1);
  CHECK(size_bound(16, Rational(1, 4)) == 2);
}
