#include <algorithm>
#include <numeric>

#include "cmcq/error.hpp"
#include "cmcq/ingest.hpp"

namespace cmcq {

void Table::add_row(std::span<const std::uint32_t> values) {
  if (values.size() != attrs.size()) throw InvariantViolation("table row arity mismatch");
  if (attrs.empty()) zero_arity_rows = 1;
  cells.insert(cells.end(), values.begin(), values.end());
}

Trie build_trie(const Table& table, std::span<const AttrId> order) {
  const std::size_t k = table.arity();
  // Column permutation: table attributes in global order.
  std::vector<std::size_t> rank(k);
  for (std::size_t c = 0; c < k; ++c) {
    auto it = std::find(order.begin(), order.end(), table.attrs[c]);
    if (it == order.end())
      throw UnknownAttribute("attribute " + std::to_string(table.attrs[c]) + " is not in the attribute order");
    rank[c] = static_cast<std::size_t>(it - order.begin());
  }
  std::vector<std::size_t> cols(k);
  std::iota(cols.begin(), cols.end(), 0);
  std::sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
  for (std::size_t i = 1; i < k; ++i)
    if (rank[cols[i]] == rank[cols[i - 1]]) throw InvariantViolation("duplicate attribute in trie table");

  Trie t;
  for (std::size_t c : cols) t.attrs_.push_back(table.attrs[c]);
  t.levels_.resize(k);
  if (k == 0) return t;

  const std::size_t n = table.rows();
  std::vector<std::uint32_t> perm(n * k);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t d = 0; d < k; ++d) perm[r * k + d] = table.cells[r * k + cols[d]];
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto row = [&](std::size_t r) { return perm.begin() + static_cast<std::ptrdiff_t>(r * k); };
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(k), row(b),
                                        row(b) + static_cast<std::ptrdiff_t>(k));
  });

  const std::size_t* prev = nullptr;
  for (const std::size_t& r : idx) {
    // First level at which this row departs from the previous one.
    std::size_t d = 0;
    if (prev)
      while (d < k && perm[*prev * k + d] == perm[r * k + d]) ++d;
    if (d == k) continue;  // duplicate row
    for (; d < k; ++d) {
      if (d + 1 < k) t.levels_[d].child_begin.push_back(static_cast<std::uint32_t>(t.levels_[d + 1].keys.size()));
      t.levels_[d].keys.push_back(perm[r * k + d]);
    }
    prev = &r;
  }
  for (std::size_t d = 0; d + 1 < k; ++d)
    t.levels_[d].child_begin.push_back(static_cast<std::uint32_t>(t.levels_[d + 1].keys.size()));
  return t;
}

std::vector<std::vector<std::uint32_t>> Trie::enumerate() const {
  std::vector<std::vector<std::uint32_t>> out;
  if (empty()) return out;
  std::vector<std::uint32_t> path(depth());
  auto walk = [&](auto&& self, std::size_t d, std::size_t lo, std::size_t hi) -> void {
    for (std::size_t i = lo; i < hi; ++i) {
      path[d] = levels_[d].keys[i];
      if (d + 1 == depth()) out.push_back(path);
      else self(self, d + 1, levels_[d].child_begin[i], levels_[d].child_begin[i + 1]);
    }
  };
  walk(walk, 0, 0, levels_[0].keys.size());
  return out;
}

}  // namespace cmcq
