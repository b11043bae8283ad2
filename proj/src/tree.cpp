#include <algorithm>
#include <fstream>
#include <sstream>

#include "cmcq/error.hpp"
#include "cmcq/ingest.hpp"
#include "detail.hpp"

namespace cmcq {

bool Dewey::is_prefix_of(const Dewey& other) const noexcept {
  return components_.size() <= other.components_.size() &&
         std::equal(components_.begin(), components_.end(), other.components_.begin());
}

Dewey Dewey::child(std::uint32_t sibling_index) const {
  auto c = components_;
  c.push_back(sibling_index);
  return Dewey(std::move(c));
}

std::string Dewey::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(components_[i]);
  }
  return out;
}

bool axis_test(const Dewey& p, const Dewey& q, Axis axis) {
  switch (axis) {
    case Axis::Child:
      return q.depth() == p.depth() + 1 && p.is_prefix_of(q);
    case Axis::Descendant:
      return q.depth() > p.depth() && p.is_prefix_of(q);
    case Axis::None:
      break;
  }
  return false;
}

std::size_t LabeledTree::add_root(Value label) {
  if (!nodes.empty()) throw InvariantViolation("tree already has a root");
  nodes.push_back({std::move(label), {}});
  return 0;
}

std::size_t LabeledTree::add_child(std::size_t parent, Value label) {
  const std::size_t id = nodes.size();
  nodes.push_back({std::move(label), {}});
  nodes.at(parent).children.push_back(id);
  return id;
}

EncodedTree dewey_encode(const LabeledTree& tree) {
  EncodedTree out;
  if (tree.empty()) return out;
  out.nodes_.reserve(tree.nodes.size());

  // Explicit stack: generated chains can be deeper than the call stack allows.
  struct Frame {
    std::size_t source;
    std::size_t next_child;
    std::uint32_t rank;
  };
  std::vector<Frame> stack;
  out.nodes_.push_back({tree.nodes[0].label, Dewey({0}), -1, 0});
  stack.push_back({0, 0, 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& children = tree.nodes[top.source].children;
    if (top.next_child == children.size()) {
      out.nodes_[top.rank].subtree_end = static_cast<std::uint32_t>(out.nodes_.size());
      stack.pop_back();
      continue;
    }
    const std::size_t sibling = top.next_child++;
    const std::size_t src = children[sibling];
    const auto rank = static_cast<std::uint32_t>(out.nodes_.size());
    out.nodes_.push_back({tree.nodes[src].label,
                          out.nodes_[top.rank].position.child(static_cast<std::uint32_t>(sibling)),
                          static_cast<std::int32_t>(top.rank), 0});
    stack.push_back({src, 0, rank});
  }
  if (out.nodes_.size() != tree.nodes.size())
    throw MalformedDocument("tree has nodes unreachable from the root");

  for (std::uint32_t r = 0; r < out.nodes_.size(); ++r) out.by_label_[out.nodes_[r].label].push_back(r);
  return out;
}

std::span<const std::uint32_t> EncodedTree::positions_of(std::string_view label) const {
  auto it = by_label_.find(label);
  if (it == by_label_.end()) return {};
  return it->second;
}

NodeTable node_table(const EncodedTree& tree, const NodeTest& test) {
  NodeTable t;
  t.tree = &tree;
  if (test.has_constant()) {
    auto span = tree.positions_of(test.constant);
    t.ranks.assign(span.begin(), span.end());
  } else {
    t.ranks.resize(tree.size());
    for (std::uint32_t r = 0; r < tree.size(); ++r) t.ranks[r] = r;
  }
  return t;
}

LabeledTree load_tree(const std::filesystem::path& path) {
  if (path.extension() == ".json") return load_tree_json(path);
  return load_tree_xml(path);
}

namespace detail {
std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return std::move(ss).str();
}
}  // namespace detail

}  // namespace cmcq
