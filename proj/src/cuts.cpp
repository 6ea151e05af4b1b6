#include <bit>
#include <algorithm>
#include <map>

#include "mmverify/aig.hpp"

namespace mmv {

namespace {

// Value of the cut function of `c` on the row of `leaves` given by `row`.
bool eval_cut(const Cut& c, const std::vector<NodeId>& leaves, unsigned row) {
  unsigned sub = 0;
  for (std::size_t i = 0; i < c.leaves.size(); ++i) {
    auto it = std::lower_bound(leaves.begin(), leaves.end(), c.leaves[i]);
    unsigned bit = (row >> (it - leaves.begin())) & 1u;
    sub |= bit << i;
  }
  return (c.truth_table >> sub) & 1u;
}

bool subset(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::vector<std::vector<Cut>> enumerate_cuts(const Aig& aig, unsigned max_leaves, std::size_t max_cuts) {
  if (max_leaves > 3) throw AigError("cuts are limited to three leaves");
  std::vector<std::vector<Cut>> cuts(aig.num_nodes());
  cuts[0].push_back({0, {}, 0});
  for (NodeId id : aig.inputs()) cuts[id].push_back({id, {id}, 0b10});
  for (const Gate& g : aig.gates()) {
    std::vector<Cut> found;
    for (const Cut& cl : cuts[g.left.node]) {
      for (const Cut& cr : cuts[g.right.node]) {
        std::vector<NodeId> leaves;
        std::set_union(cl.leaves.begin(), cl.leaves.end(), cr.leaves.begin(), cr.leaves.end(),
                       std::back_inserter(leaves));
        if (leaves.size() > max_leaves) continue;
        if (std::any_of(found.begin(), found.end(), [&](const Cut& c) { return c.leaves == leaves; })) continue;
        std::uint8_t tt = 0;
        for (unsigned row = 0; row < (1u << leaves.size()); ++row) {
          bool l = eval_cut(cl, leaves, row) != g.left.negated;
          bool r = eval_cut(cr, leaves, row) != g.right.negated;
          if (l && r) tt |= static_cast<std::uint8_t>(1u << row);
        }
        found.push_back({g.id, std::move(leaves), tt});
      }
    }
    // Drop dominated cuts (a proper leaf subset exists).
    std::vector<std::uint8_t> dominated(found.size(), 0);
    for (std::size_t i = 0; i < found.size(); ++i)
      for (std::size_t j = 0; j < found.size() && !dominated[i]; ++j)
        dominated[i] = j != i && found[j].leaves.size() < found[i].leaves.size() && subset(found[j].leaves, found[i].leaves);
    std::vector<Cut> kept;
    for (std::size_t i = 0; i < found.size(); ++i)
      if (!dominated[i]) kept.push_back(std::move(found[i]));
    std::sort(kept.begin(), kept.end(), [](const Cut& a, const Cut& b) {
      if (a.leaves.size() != b.leaves.size()) return a.leaves.size() < b.leaves.size();
      return a.leaves < b.leaves;
    });
    if (kept.size() + 1 > max_cuts) kept.resize(max_cuts > 0 ? max_cuts - 1 : 0);
    kept.push_back({g.id, {g.id}, 0b10});
    cuts[g.id] = std::move(kept);
  }
  return cuts;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint8_t kXor2 = 0b0110, kXnor2 = 0b1001;
constexpr std::uint8_t kXor3 = 0x96, kXnor3 = 0x69;

std::uint8_t and2_table(unsigned pol) {
  std::uint8_t tt = 0;
  for (unsigned b = 0; b < 4; ++b) {
    unsigned v = b ^ pol;
    if ((v & 3u) == 3u) tt |= static_cast<std::uint8_t>(1u << b);
  }
  return tt;
}

std::uint8_t maj3_table(unsigned pol) {
  std::uint8_t tt = 0;
  for (unsigned b = 0; b < 8; ++b) {
    unsigned v = b ^ pol;
    if (std::popcount(v) >= 2) tt |= static_cast<std::uint8_t>(1u << b);
  }
  return tt;
}

// Gates strictly between `root` and the cut leaves.
void collect_cone(const Aig& aig, NodeId root, const std::vector<NodeId>& leaves, std::vector<std::uint8_t>& mark) {
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    if (mark[u] || !aig.is_gate(u) || std::binary_search(leaves.begin(), leaves.end(), u)) continue;
    mark[u] = 1;
    const Gate& g = aig.gate(u);
    stack.push_back(g.left.node);
    stack.push_back(g.right.node);
  }
}

struct Candidate {
  NodeId node;
  std::uint8_t tt;
};

}  // namespace

std::vector<AdderInstance> detect_adders(const Aig& aig, const std::vector<std::vector<Cut>>& cuts) {
  std::map<std::vector<NodeId>, std::vector<Candidate>> by_leaves;
  for (const Gate& g : aig.gates()) {
    for (const Cut& c : cuts[g.id]) {
      if (c.leaves.size() == 2 || c.leaves.size() == 3) by_leaves[c.leaves].push_back({g.id, c.truth_table});
    }
  }

  std::vector<AdderInstance> out;
  std::vector<std::uint8_t> inside_fa(aig.num_nodes(), 0);

  // A carry is preferred when something outside the sum's logic consumes it.
  auto pick_carry = [&](NodeId sum, const std::vector<NodeId>& leaves,
                        const std::vector<std::pair<Candidate, unsigned>>& carries) -> const std::pair<Candidate, unsigned>* {
    std::vector<std::uint8_t> cone(aig.num_nodes(), 0);
    collect_cone(aig, sum, leaves, cone);
    const std::pair<Candidate, unsigned>* best = nullptr;
    for (const auto& entry : carries) {
      NodeId c = entry.first.node;
      if (c == sum) continue;
      bool external = aig.output_refs()[c] > 0;
      for (NodeId p : aig.fanouts()[c]) external = external || !cone[p];
      if (external && (!best || c < best->first.node)) best = &entry;
    }
    return best;
  };

  for (unsigned arity : {3u, 2u}) {
    for (const auto& [leaves, cands] : by_leaves) {
      if (leaves.size() != arity) continue;
      std::vector<std::pair<Candidate, unsigned>> carries;  // (node, input polarity)
      for (const Candidate& c : cands) {
        for (unsigned pol = 0; pol < (1u << arity); ++pol) {
          std::uint8_t t = arity == 3 ? maj3_table(pol) : and2_table(pol);
          std::uint8_t mask = arity == 3 ? 0xff : 0x0f;
          if (c.tt == t || c.tt == static_cast<std::uint8_t>(~t & mask)) carries.push_back({c, pol});
        }
      }
      for (const Candidate& s : cands) {
        bool is_xor = arity == 3 ? s.tt == kXor3 : s.tt == kXor2;
        bool is_xnor = arity == 3 ? s.tt == kXnor3 : s.tt == kXnor2;
        if (!is_xor && !is_xnor) continue;
        if (arity == 2 && inside_fa[s.node]) continue;
        const auto* carry = pick_carry(s.node, leaves, carries);
        if (!carry) continue;
        if (arity == 2 && inside_fa[carry->first.node]) continue;
        unsigned pol = carry->second;
        std::uint8_t t = arity == 3 ? maj3_table(pol) : and2_table(pol);
        AdderInstance inst;
        inst.kind = arity == 3 ? AdderInstance::Kind::FA : AdderInstance::Kind::HA;
        for (std::size_t i = 0; i < arity; ++i) inst.inputs.push_back({leaves[i], ((pol >> i) & 1u) != 0});
        bool parity = (std::popcount(pol) & 1) != 0;
        inst.sum = {s.node, parity != is_xnor};
        inst.carry = {carry->first.node, carry->first.tt != t};
        if (arity == 3) {
          collect_cone(aig, s.node, leaves, inside_fa);
          collect_cone(aig, carry->first.node, leaves, inside_fa);
        }
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

FsaApproximation approximate_fsa(const Aig& aig, const std::vector<AdderInstance>& adders) {
  FsaApproximation result;
  if (adders.empty()) {
    std::vector<NodeId> all;
    for (const Gate& g : aig.gates()) all.push_back(g.id);
    result.region = close_subcircuit(aig, std::move(all));
    result.whole_circuit = true;
    return result;
  }
  // Gates of each adder cell, keyed by its sum and carry nodes.
  std::vector<std::vector<std::size_t>> cells_at(aig.num_nodes());
  for (std::size_t k = 0; k < adders.size(); ++k) {
    cells_at[adders[k].sum.node].push_back(k);
    cells_at[adders[k].carry.node].push_back(k);
  }
  auto cell_gates = [&](std::size_t k, std::vector<std::uint8_t>& mark, std::vector<std::pair<NodeId, bool>>& stack) {
    std::vector<NodeId> leaves;
    for (Literal l : adders[k].inputs) leaves.push_back(l.node);
    std::sort(leaves.begin(), leaves.end());
    collect_cone(aig, adders[k].sum.node, leaves, mark);
    collect_cone(aig, adders[k].carry.node, leaves, mark);
    for (NodeId l : leaves) stack.emplace_back(l, true);
  };

  std::vector<std::uint8_t> member(aig.num_nodes(), 0);
  std::vector<NodeId> output_roots;
  for (std::size_t i = 0; i < aig.num_outputs(); ++i) {
    NodeId start = aig.outputs()[i].node;
    if (!aig.is_gate(start)) {
      if (aig.is_input(start)) result.bypassing_outputs.push_back(i);
      continue;
    }
    std::vector<std::uint8_t> local(aig.num_nodes(), 0), seen(aig.num_nodes(), 0);
    // (node, reached as the leaf of an adder cell)
    std::vector<std::pair<NodeId, bool>> stack{{start, false}};
    bool met_adder = false;
    while (!stack.empty()) {
      auto [u, from_cell] = stack.back();
      stack.pop_back();
      if (seen[u] || !aig.is_gate(u)) continue;
      if (!cells_at[u].empty()) {
        // Cell leaves that are adder outputs belong to the cell that drives them.
        if (from_cell) continue;
        seen[u] = 1;
        met_adder = true;
        for (std::size_t k : cells_at[u]) cell_gates(k, local, stack);
        continue;
      }
      seen[u] = 1;
      const Gate& g = aig.gate(u);
      // Partial products (gates over primary inputs only) stay outside.
      if (u != start && !aig.is_gate(g.left.node) && !aig.is_gate(g.right.node)) continue;
      local[u] = 1;
      stack.emplace_back(g.left.node, false);
      stack.emplace_back(g.right.node, false);
    }
    if (!met_adder) {
      result.bypassing_outputs.push_back(i);
      continue;
    }
    for (NodeId id = 0; id < aig.num_nodes(); ++id)
      if (local[id]) member[id] = 1;
    output_roots.push_back(start);
  }
  std::vector<NodeId> gates;
  for (const Gate& g : aig.gates())
    if (member[g.id]) gates.push_back(g.id);
  if (!gates.empty()) result.region = close_subcircuit(aig, std::move(gates), output_roots);
  return result;
}

}  // namespace mmv
