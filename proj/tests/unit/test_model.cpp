#include <doctest.h>

#include <functional>

#include "cmcq/error.hpp"
#include "cmcq/model.hpp"
#include "cmcq/testkit.hpp"

using namespace cmcq;

namespace {

std::size_t leaves(const PatternNode& p) {
  std::size_t n = 0;
  for_each_node(p, [&](const PatternNode& v) { n += v.children.empty(); });
  return n;
}

std::vector<NodeId> ids(const PatternPath& p) {
  std::vector<NodeId> out;
  for (const auto& s : p.nodes) out.push_back(s.id);
  return out;
}

}  // namespace

TEST_CASE("parse: relation joined with a pattern") {
  const Query q = parse_query("REL R1(b,c) FROM \"r1.csv\"; TREE T FROM \"d.xml\" MATCH :a[:b]/:c; RETURN a,b,c");
  REQUIRE(q.relations.size() == 1);
  CHECK(q.relations[0].attributes == std::vector<std::string>{"b", "c"});
  CHECK(q.relations[0].source == "r1.csv");
  REQUIRE(q.trees.size() == 1);
  const PatternNode& a = q.trees[0].pattern;
  CHECK(a.test == NodeTest::variable_label("a"));
  REQUIRE(a.children.size() == 2);
  CHECK(a.children[0].test.variable == "b");
  CHECK(a.children[1].test.variable == "c");
  CHECK(a.children[0].axis == Axis::Child);
  CHECK(a.children[1].axis == Axis::Child);
  CHECK(q.return_vars == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("parse: degenerate and single-edge queries") {
  const Query rel = parse_query("REL R(a) FROM \"r.csv\"; RETURN a");
  CHECK(rel.trees.empty());
  CHECK(rel.relations.size() == 1);

  const Query d = parse_query("TREE T FROM \"d.xml\" MATCH :a//:c; RETURN a,c");
  REQUIRE(d.trees[0].pattern.children.size() == 1);
  CHECK(d.trees[0].pattern.children[0].axis == Axis::Descendant);
}

TEST_CASE("parse: label tests, comments, pre-order ids across statements") {
  const Query q = parse_query(
      "# comment\n"
      "TREE A FROM \"a.xml\" MATCH x[\"y z\"]/w:v;\n"
      "TREE B FROM \"b.xml\" MATCH :p//:q;\n"
      "RETURN v, p;");
  const PatternNode& x = q.trees[0].pattern;
  CHECK(x.test == NodeTest::constant_label("x"));
  CHECK(x.children[0].test == NodeTest::constant_label("y z"));
  CHECK(x.children[1].test == NodeTest::both("w", "v"));
  CHECK(x.id == 0);
  CHECK(x.children[0].id == 1);
  CHECK(x.children[1].id == 2);
  CHECK(q.trees[1].pattern.id == 3);
  CHECK(q.trees[1].pattern.children[0].id == 4);
}

TEST_CASE("parse: errors carry positions") {
  try {
    parse_query("REL R(a) FROM \"r\";\nTREE T FROM \"t\" MATCH :a[:b;\nRETURN a");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 1);
  }
  CHECK_THROWS_AS(parse_query("RETURN"), SyntaxError);
  CHECK_THROWS_AS(parse_query("REL R(a) FROM \"r\"; REL R(b) FROM \"s\"; RETURN a"), DuplicateName);
  CHECK_THROWS_AS(parse_query("TREE T FROM \"r\" MATCH :a; TREE T FROM \"s\" MATCH :b; RETURN a"), DuplicateName);
}

TEST_CASE("validate") {
  const ValidatedQuery q =
      validate(parse_query("REL R1(b,c) FROM \"r1\"; TREE T FROM \"t\" MATCH :a[:b]/:c; RETURN a,b,c"));
  const int a = q.variable_id("a");
  const int b = q.variable_id("b");
  REQUIRE(a >= 0);
  REQUIRE(b >= 0);
  CHECK(q.variable_id("z") == -1);
  CHECK(q.occurrences(a).size() == 1);
  CHECK(q.occurrences(a)[0].kind == VariableOccurrence::Kind::PatternNode);
  CHECK(q.occurrences(b).size() == 2);

  CHECK_THROWS_AS(validate(parse_query("REL R(a) FROM \"r\"; RETURN z")), UnboundReturnVariable);
  Query empty = parse_query("REL R(a) FROM \"r\"; RETURN a");
  empty.return_vars.clear();
  CHECK_THROWS_AS(validate(empty), EmptyReturn);

  const ValidatedQuery twice = validate(parse_query("TREE T FROM \"t\" MATCH :x/:x; RETURN x"));
  REQUIRE(twice.label_equalities().size() == 1);
  CHECK(twice.label_equalities()[0] == std::pair<NodeId, NodeId>{0, 1});
}

TEST_CASE("merge_patterns") {
  const Query q = parse_query(
      "TREE A FROM \"a\" MATCH :a/:b; TREE B FROM \"b\" MATCH :c; TREE C FROM \"c\" MATCH :d//:e; RETURN a");
  const PatternNode one = merge_patterns({q.trees[0].pattern});
  CHECK(one == q.trees[0].pattern);
  CHECK_FALSE(is_merge_root(one));

  const PatternNode two = merge_patterns({q.trees[0].pattern, q.trees[1].pattern});
  CHECK(is_merge_root(two));
  REQUIRE(two.children.size() == 2);
  CHECK(two.children[0].axis == Axis::Descendant);
  CHECK(two.children[1].axis == Axis::Descendant);
  CHECK(two.id > max_node_id(q.trees[0].pattern));
  CHECK(two.id > max_node_id(q.trees[1].pattern));

  const PatternNode three = merge_patterns({q.trees[0].pattern, q.trees[1].pattern, q.trees[2].pattern});
  CHECK(three.children.size() == 3);
  CHECK(node_count(three) == 1 + 2 + 1 + 2);
}

TEST_CASE("root_to_leaf_paths and branch_nodes") {
  const PatternNode abc = parse_query("TREE T FROM \"t\" MATCH :a[:b]/:c; RETURN a").trees[0].pattern;
  const auto p = root_to_leaf_paths(abc);
  REQUIRE(p.size() == 2);
  CHECK(ids(p[0]) == std::vector<NodeId>{0, 1});
  CHECK(ids(p[1]) == std::vector<NodeId>{0, 2});
  CHECK(branch_nodes(abc) == std::set<NodeId>{0});

  const PatternNode single = parse_query("TREE T FROM \"t\" MATCH :a; RETURN a").trees[0].pattern;
  CHECK(root_to_leaf_paths(single).size() == 1);
  CHECK(root_to_leaf_paths(single)[0].axes.empty());

  const PatternNode abcd = parse_query("TREE T FROM \"t\" MATCH :a[:b]/:c//:d; RETURN a").trees[0].pattern;
  const auto q = root_to_leaf_paths(abcd);
  REQUIRE(q.size() == 2);
  CHECK(ids(q[1]) == std::vector<NodeId>{0, 2, 3});
  CHECK(q[1].axes == std::vector<Axis>{Axis::Child, Axis::Descendant});

  const PatternNode chain = parse_query("TREE T FROM \"t\" MATCH :a/:b/:c; RETURN a").trees[0].pattern;
  CHECK(branch_nodes(chain).empty());

  const PatternNode three = parse_query("TREE T FROM \"t\" MATCH :a[:b][:c]/:d; RETURN a").trees[0].pattern;
  CHECK(branch_nodes(three) == std::set<NodeId>{0});
}

TEST_CASE("property: print/parse round trip and path structure on random queries") {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const Query q = random_bound_query(seed);
    CAPTURE(seed);
    const std::string text = print_query(q);
    CAPTURE(text);
    CHECK(parse_query(text) == q);

    for (const auto& atom : q.trees) {
      const PatternNode& p = atom.pattern;
      const auto paths = root_to_leaf_paths(p);
      CHECK(paths.size() == leaves(p));
      // Every edge appears in some path.
      std::set<std::pair<NodeId, NodeId>> edges, covered;
      for_each_node_with_parent(p, [&](const PatternNode& v, const PatternNode* parent) {
        if (parent) edges.insert({parent->id, v.id});
      });
      for (const auto& path : paths)
        for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) covered.insert({path.nodes[i].id, path.nodes[i + 1].id});
      CHECK(covered == edges);
      // Branch nodes are interior.
      for (NodeId b : branch_nodes(p)) CHECK(find_node(p, b)->children.size() >= 2);
    }
  }
}
