#include <algorithm>
#include <chrono>
#include <limits>

#include "cmcq/engine.hpp"
#include "cmcq/error.hpp"

namespace cmcq {
namespace {

// First index in [lo, hi) with keys[i] >= x, probing 1, 2, 4, ... ahead of lo.
std::uint32_t gallop(const std::vector<std::uint32_t>& keys, std::uint32_t lo, std::uint32_t hi, std::uint32_t x) {
  if (lo >= hi || keys[lo] >= x) return lo;
  std::uint32_t step = 1;
  std::uint32_t prev = lo;
  while (lo + step < hi && keys[lo + step] < x) {
    prev = lo + step;
    step <<= 1;
  }
  const std::uint32_t end = std::min(hi, lo + step + 1);
  return static_cast<std::uint32_t>(std::lower_bound(keys.begin() + prev + 1, keys.begin() + end, x) - keys.begin());
}

class Joiner {
 public:
  Joiner(const std::vector<Trie>& tries, const std::vector<StructuralPredicate>& preds,
         const std::vector<AttrId>& order)
      : tries_(tries), order_(order), levels_(order.size()) {
    auto level_of = [&](AttrId a) -> std::size_t {
      auto it = std::find(order.begin(), order.end(), a);
      if (it == order.end()) throw UnknownAttribute("attribute " + std::to_string(a) + " is not in the join order");
      return static_cast<std::size_t>(it - order.begin());
    };
    chosen_.resize(tries.size());
    for (std::size_t t = 0; t < tries.size(); ++t) {
      std::size_t prev = 0;
      for (std::size_t d = 0; d < tries[t].depth(); ++d) {
        const std::size_t l = level_of(tries[t].attrs()[d]);
        if (d > 0 && l <= prev) throw InvariantViolation("trie attributes out of join order");
        prev = l;
        levels_[l].participants.push_back({t, d});
      }
      chosen_[t].resize(tries[t].depth());
    }
    for (std::size_t l = 0; l < levels_.size(); ++l)
      if (levels_[l].participants.empty())
        throw InvariantViolation("join attribute " + std::to_string(order[l]) + " is in no table");
    for (const auto& p : preds) {
      if (p.pre_enforced) continue;
      const std::size_t u = level_of(p.upper), w = level_of(p.lower);
      if (u < w) levels_[w].ranged.push_back({u, p.axis, p.tree});
      else levels_[u].checked.push_back({w, p.axis, p.tree});
    }
    binding_.resize(order.size());
    counts_.assign(order.size(), 0);
    ms_.assign(order.size(), 0);
  }

  void run() {
    for (const auto& t : tries_)
      if (t.empty()) return;
    bind(0);
  }

  std::vector<std::uint32_t>& cells() { return cells_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  const std::vector<double>& ms() const { return ms_; }

 private:
  struct Participant {
    std::size_t trie;
    std::size_t depth;
  };
  // Predicate evaluated at this level against an earlier level's binding.
  struct Link {
    std::size_t other;
    Axis axis;
    const EncodedTree* tree;
  };
  struct Level {
    std::vector<Participant> participants;
    std::vector<Link> ranged;   // this level is the lower end, upper bound earlier
    std::vector<Link> checked;  // this level is the upper end, lower bound earlier
  };

  std::pair<std::uint32_t, std::uint32_t> range(const Participant& p) const {
    const Trie& t = tries_[p.trie];
    if (p.depth == 0) return {0, static_cast<std::uint32_t>(t.level(0).keys.size())};
    const auto& cb = t.level(p.depth - 1).child_begin;
    const std::uint32_t parent = chosen_[p.trie][p.depth - 1];
    return {cb[parent], cb[parent + 1]};
  }

  void bind(std::size_t l) {
    if (l == order_.size()) {
      cells_.insert(cells_.end(), binding_.begin(), binding_.end());
      return;
    }
    const auto started = std::chrono::steady_clock::now();
    double nested = 0;
    const Level& lv = levels_[l];

    // Key window from ancestors bound earlier: (upper, subtree_end(upper)).
    std::uint32_t key_lo = 0, key_hi = std::numeric_limits<std::uint32_t>::max();
    for (const auto& r : lv.ranged) {
      const std::uint32_t up = binding_[r.other];
      key_lo = std::max(key_lo, up + 1);
      key_hi = std::min(key_hi, r.tree->node(up).subtree_end);
    }

    const std::size_t k = lv.participants.size();
    std::vector<std::uint32_t> lo(k), hi(k);
    std::size_t driver = 0;
    for (std::size_t i = 0; i < k; ++i) {
      std::tie(lo[i], hi[i]) = range(lv.participants[i]);
      const auto& keys = tries_[lv.participants[i].trie].level(lv.participants[i].depth).keys;
      lo[i] = gallop(keys, lo[i], hi[i], key_lo);
      if (hi[i] - lo[i] < hi[driver] - lo[driver]) driver = i;
    }

    const Participant& dp = lv.participants[driver];
    const auto& dkeys = tries_[dp.trie].level(dp.depth).keys;
    for (std::uint32_t i = lo[driver]; i < hi[driver]; ++i) {
      const std::uint32_t x = dkeys[i];
      if (x >= key_hi) break;
      bool all = true;
      bool exhausted = false;
      for (std::size_t j = 0; j < k && all; ++j) {
        if (j == driver) continue;
        const auto& keys = tries_[lv.participants[j].trie].level(lv.participants[j].depth).keys;
        lo[j] = gallop(keys, lo[j], hi[j], x);
        if (lo[j] == hi[j]) exhausted = true;
        all = !exhausted && keys[lo[j]] == x;
      }
      if (exhausted) break;
      if (!all) continue;
      bool ok = true;
      for (const auto& r : lv.ranged)
        if (r.axis == Axis::Child && !r.tree->is_child(binding_[r.other], x)) ok = false;
      for (const auto& c : lv.checked)
        if (ok && !c.tree->satisfies(x, binding_[c.other], c.axis)) ok = false;
      if (!ok) continue;

      for (std::size_t j = 0; j < k; ++j)
        chosen_[lv.participants[j].trie][lv.participants[j].depth] = j == driver ? i : lo[j];
      binding_[l] = x;
      ++counts_[l];
      const auto before = std::chrono::steady_clock::now();
      bind(l + 1);
      nested += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - before).count();
    }
    ms_[l] += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count() - nested;
  }

  const std::vector<Trie>& tries_;
  const std::vector<AttrId>& order_;
  std::vector<Level> levels_;
  std::vector<std::vector<std::uint32_t>> chosen_;  // per trie, per depth: index of the bound key
  std::vector<std::uint32_t> binding_;
  std::vector<std::uint32_t> cells_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> ms_;
};

}  // namespace

JoinOutput generic_join(const std::vector<Trie>& tries, const std::vector<StructuralPredicate>& preds,
                        const std::vector<AttrId>& order, const std::vector<std::string>& names) {
  Joiner j(tries, preds, order);
  j.run();
  JoinOutput out;
  out.attrs = order;
  out.cells = std::move(j.cells());
  for (std::size_t l = 0; l < order.size(); ++l) {
    const std::string name = l < names.size() ? names[l] : std::to_string(order[l]);
    out.metrics.add("join " + name, j.counts()[l], j.ms()[l]);
  }
  return out;
}

}  // namespace cmcq
