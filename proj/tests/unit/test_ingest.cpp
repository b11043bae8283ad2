#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "cmcq/error.hpp"
#include "cmcq/ingest.hpp"
#include "cmcq/testkit.hpp"

using namespace cmcq;
namespace fs = std::filesystem;

namespace {

LabeledTree random_tree(std::mt19937_64& rng, std::size_t n) {
  LabeledTree t;
  t.add_root("l0");
  for (std::size_t i = 1; i < n; ++i) t.add_child(rng() % i, "l" + std::to_string(rng() % 5));
  return t;
}

std::vector<std::string> labels(const LabeledTree& t, std::size_t v) {
  std::vector<std::string> out;
  for (std::size_t c : t.nodes[v].children) out.push_back(t.nodes[c].label);
  return out;
}

fs::path scratch(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "cmcq_unit";
  fs::create_directories(dir);
  std::ofstream(dir / name, std::ios::binary) << text;
  return dir / name;
}

}  // namespace

TEST_CASE("csv relations") {
  const Relation r = parse_relation_csv("b,c\nb0,c0\nb0,c1\nb1,c0\nb1,c1\n", "R1");
  CHECK(r.attributes == std::vector<std::string>{"b", "c"});
  CHECK(r.rows.size() == 4);

  CHECK(parse_relation_csv("a,b\n1,2\n1,2\n3,4\n").rows.size() == 2);
  CHECK_THROWS_AS(parse_relation_csv("b,c\nx,y,z\n"), RaggedRow);
  CHECK_THROWS_AS(parse_relation_csv(""), EmptyHeader);

  const Relation q = parse_relation_csv("a\n\"x, \"\"y\"\"\"\n");
  REQUIRE(q.rows.size() == 1);
  CHECK(q.rows[0][0] == "x, \"y\"");
  CHECK(parse_relation_csv(relation_to_csv(q)).rows == q.rows);

  const fs::path p = scratch("r.csv", "x,y\n1,2\n");
  CHECK(load_relation_csv(p).rows.size() == 1);
  CHECK_THROWS_AS(load_relation_csv(p.parent_path() / "missing.csv"), IoError);
}

TEST_CASE("xml trees") {
  const LabeledTree ab = parse_tree_xml("<a><b/><c/></a>");
  CHECK(ab.nodes[0].label == "a");
  CHECK(labels(ab, 0) == std::vector<std::string>{"b", "c"});

  // item, @id, 7, x: the attribute and its value are two nodes.
  const LabeledTree item = parse_tree_xml("<item id=\"7\">x</item>");
  CHECK(item.nodes.size() == 4);
  CHECK(labels(item, 0) == std::vector<std::string>{"@id", "x"});
  CHECK(labels(item, item.nodes[0].children[0]) == std::vector<std::string>{"7"});
  CHECK(parse_tree_xml(tree_to_xml(item)).nodes.size() == item.nodes.size());

  CHECK(parse_tree_xml("<a>   </a>").nodes.size() == 1);
  CHECK_THROWS_AS(parse_tree_xml("<a><b></a>"), MalformedDocument);
  CHECK_THROWS_AS(load_tree_xml(fs::temp_directory_path() / "cmcq_unit" / "nope.xml"), IoError);
}

TEST_CASE("json trees") {
  const LabeledTree f = parse_tree_json(R"({"flag":"abnormal"})");
  REQUIRE(f.nodes.size() == 3);
  CHECK(f.nodes[0].label == "$");
  CHECK(labels(f, 0) == std::vector<std::string>{"flag"});
  CHECK(labels(f, 1) == std::vector<std::string>{"abnormal"});

  const LabeledTree arr = parse_tree_json(R"({"a":[1,2]})");
  CHECK(labels(arr, 1) == std::vector<std::string>{"1", "2"});

  CHECK(parse_tree_json("{}").nodes.size() == 1);
  CHECK(labels(parse_tree_json(R"({"x":1.50})"), 1) == std::vector<std::string>{"1.50"});
  CHECK_THROWS_AS(parse_tree_json("{\"a\":"), MalformedDocument);

  const fs::path p = scratch("d.json", R"({"k":true})");
  CHECK(load_tree(p).nodes.size() == 3);
}

TEST_CASE("dewey encoding and axis tests") {
  LabeledTree one;
  one.add_root("r");
  CHECK(dewey_encode(one).node(0).position.to_string() == "0");

  LabeledTree chain;
  std::size_t v = chain.add_root("c");
  for (int i = 0; i < 5; ++i) v = chain.add_child(v, "c");
  const EncodedTree ec = dewey_encode(chain);
  for (std::uint32_t i = 1; i < ec.size(); ++i) {
    CHECK(ec.node(i).position.depth() == i + 1);
    CHECK(ec.node(i - 1).position.is_prefix_of(ec.node(i).position));
  }

  const Dewey d0({0}), d02({0, 2}), d013({0, 1, 3}), d01({0, 1});
  CHECK(axis_test(d0, d02, Axis::Child));
  CHECK_FALSE(axis_test(d0, d013, Axis::Child));
  CHECK(axis_test(d0, d013, Axis::Descendant));
  CHECK_FALSE(axis_test(d01, d02, Axis::Descendant));
  CHECK_FALSE(axis_test(d0, d0, Axis::Descendant));

  const Instance tbt = two_by_two_instance();
  const EncodedTree t = dewey_encode(tbt.trees.at("tree.xml"));
  CHECK(t.node(0).position.to_string() == "0");
  CHECK(t.node(1).position.to_string() == "0.0");
  CHECK(t.node(8).position.to_string() == "0.7");
}

TEST_CASE("property: dewey codes agree with the source tree") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1, 2, 7, 50, 300, 1000}) {
    const LabeledTree t = random_tree(rng, n);
    const EncodedTree e = dewey_encode(t);
    REQUIRE(e.size() == t.nodes.size());
    // Map source indexes to ranks through the pre-order walk.
    std::vector<std::size_t> parent(t.nodes.size(), SIZE_MAX);
    for (std::size_t u = 0; u < t.nodes.size(); ++u)
      for (std::size_t c : t.nodes[u].children) parent[c] = u;
    std::vector<std::size_t> rank_of(t.nodes.size());
    std::vector<std::size_t> stack{0};
    std::size_t next = 0;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      rank_of[u] = next++;
      for (auto it = t.nodes[u].children.rbegin(); it != t.nodes[u].children.rend(); ++it) stack.push_back(*it);
    }
    std::set<std::string> codes;
    for (std::uint32_t i = 0; i < e.size(); ++i) codes.insert(e.node(i).position.to_string());
    CHECK(codes.size() == e.size());
    for (std::uint32_t i = 1; i < e.size(); ++i) CHECK(e.node(i - 1).position < e.node(i).position);
    if (n > 300) continue;  // the quadratic check below stays cheap
    for (std::size_t u = 0; u < t.nodes.size(); ++u)
      for (std::size_t w = 0; w < t.nodes.size(); ++w) {
        const auto& pu = e.node(static_cast<std::uint32_t>(rank_of[u])).position;
        const auto& pw = e.node(static_cast<std::uint32_t>(rank_of[w])).position;
        CHECK(axis_test(pu, pw, Axis::Child) == (parent[w] == u));
      }
  }
}

TEST_CASE("property: exhaustive child test on a 1000-node tree") {
  std::mt19937_64 rng(5);
  const LabeledTree t = random_tree(rng, 1000);
  const EncodedTree e = dewey_encode(t);
  std::size_t mismatches = 0;
  for (std::uint32_t u = 0; u < e.size(); ++u)
    for (std::uint32_t w = 0; w < e.size(); ++w) {
      const bool child = axis_test(e.node(u).position, e.node(w).position, Axis::Child);
      const bool desc = axis_test(e.node(u).position, e.node(w).position, Axis::Descendant);
      mismatches += child != (e.node(w).parent == static_cast<std::int32_t>(u));
      mismatches += desc != e.is_descendant(u, w);
    }
  CHECK(mismatches == 0);
}

TEST_CASE("node tables") {
  const EncodedTree t = dewey_encode(two_by_two_instance().trees.at("tree.xml"));
  CHECK(node_table(t, NodeTest::variable_label("b")).size() == t.size());
  CHECK(node_table(t, NodeTest::constant_label("b2")).size() == 1);
  CHECK(node_table(t, NodeTest::both("c3", "x")).size() == 1);
  CHECK(node_table(t, NodeTest::constant_label("zzz")).size() == 0);

  const EncodedTree m = dewey_encode(parse_tree_json(R"({"patient":"p1","flag":"abnormal"})"));
  const NodeTable flag = node_table(m, NodeTest::constant_label("flag"));
  REQUIRE(flag.size() == 1);
  CHECK(flag.label(0) == "flag");

  std::mt19937_64 rng(3);
  const EncodedTree r = dewey_encode(random_tree(rng, 400));
  for (const auto& [label, ranks] : r.label_index())
    CHECK(node_table(r, NodeTest::constant_label(label)).size() == ranks.size());
}

TEST_CASE("dictionary") {
  const Dictionary d = Dictionary::build({"b", "a", "c", "a"});
  CHECK(d.size() == 3);
  CHECK(d.id("a") < d.id("b"));
  CHECK(d.id("b") < d.id("c"));
  CHECK(d.value(d.id("c")) == "c");
  CHECK_FALSE(d.find("q").has_value());
  CHECK_THROWS_AS(d.id("q"), UnknownAttribute);
}

TEST_CASE("tries") {
  Table r1{{0, 1}, {}};
  for (auto [b, c] : {std::pair{0u, 0u}, {0u, 1u}, {1u, 0u}, {1u, 1u}}) {
    const std::uint32_t row[] = {b, c};
    r1.add_row(row);
  }
  const std::vector<AttrId> order{0, 1};
  const Trie t = build_trie(r1, order);
  CHECK(t.level(0).keys.size() == 2);
  CHECK(t.level(1).keys.size() == 4);
  CHECK(t.level(0).child_begin[1] - t.level(0).child_begin[0] == 2);

  CHECK(build_trie(Table{{0, 1}, {}}, order).empty());

  Table single{{1}, {}};
  for (std::uint32_t v : {5u, 2u, 5u, 9u}) single.add_row(std::span<const std::uint32_t>(&v, 1));
  const Trie s = build_trie(single, order);
  CHECK(s.depth() == 1);
  CHECK(s.level(0).keys == std::vector<std::uint32_t>{2, 5, 9});

  const std::vector<AttrId> partial{0};
  CHECK_THROWS_AS(build_trie(r1, partial), UnknownAttribute);
}

TEST_CASE("property: trie enumeration is a bijection onto the row set") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 100; ++round) {
    const std::size_t arity = 1 + rng() % 4;
    Table t;
    for (std::size_t i = 0; i < arity; ++i) t.attrs.push_back(static_cast<AttrId>(i));
    std::vector<AttrId> order(t.attrs);
    std::shuffle(order.begin(), order.end(), rng);
    std::set<std::vector<std::uint32_t>> expected;
    const std::size_t rows = rng() % 40;
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<std::uint32_t> row(arity);
      for (auto& v : row) v = static_cast<std::uint32_t>(rng() % 4);
      t.add_row(row);
      // Rows come back keyed in `order`.
      std::vector<std::uint32_t> keyed;
      for (AttrId a : order) keyed.push_back(row[static_cast<std::size_t>(a)]);
      expected.insert(keyed);
    }
    const Trie trie = build_trie(t, order);
    CHECK(trie.attrs() == order);
    const auto got = trie.enumerate();
    CHECK(std::set<std::vector<std::uint32_t>>(got.begin(), got.end()) == expected);
    CHECK(got.size() == expected.size());
    CHECK(trie.tuple_count() == expected.size());
  }
}

TEST_CASE("load_database resolves sources against a directory") {
  const Instance inst = two_by_two_instance();
  const fs::path dir = fs::temp_directory_path() / "cmcq_unit" / "two-by-two";
  write_instance(inst, dir);
  const ValidatedQuery q = load_query(dir / "query.cmcq");
  const Database db = load_database(q, dir);
  CHECK(db.relations.at("r1.csv").rows.size() == 4);
  CHECK(db.trees.at("tree.xml").size() == 9);
  CHECK_THROWS_AS(load_database(q, dir / "missing"), IoError);
}
