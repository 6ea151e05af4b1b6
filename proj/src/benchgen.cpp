#include "mmverify/benchgen.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace mmv {

Literal AigBuilder::input(std::string name) { return {aig_.add_input(std::move(name)), false}; }

void AigBuilder::output(Literal lit, std::string name) { aig_.add_output(lit, std::move(name)); }

Literal AigBuilder::and_(Literal a, Literal b) {
  if (a == kFalse || b == kFalse || a == !b) return kFalse;
  if (a == kTrue) return b;
  if (b == kTrue || a == b) return a;
  if (a.aiger() < b.aiger()) std::swap(a, b);
  std::uint64_t key = (std::uint64_t{a.aiger()} << 32) | b.aiger();
  auto it = strash_.find(key);
  if (it != strash_.end()) return it->second;
  Literal g = aig_.add_gate(a, b);
  strash_.emplace(key, g);
  return g;
}

Literal AigBuilder::xor_(Literal a, Literal b) {
  if (a.is_constant()) return a.negated ? !b : b;
  if (b.is_constant()) return b.negated ? !a : a;
  return and_(!and_(a, b), !and_(!a, !b));
}

std::pair<Literal, Literal> AigBuilder::half_adder(Literal a, Literal b) { return {xor_(a, b), and_(a, b)}; }

std::pair<Literal, Literal> AigBuilder::full_adder(Literal a, Literal b, Literal c) {
  Literal t = xor_(a, b);
  Literal s = xor_(t, c);
  Literal carry = or_(and_(a, b), and_(t, c));
  return {s, carry};
}

namespace {

// Adds every pending bit of `bits` into the running sum/carry vectors, one
// carry-save level. Weights at or above `width` are dropped.
void csa_level(AigBuilder& b, std::map<unsigned, Literal>& sum, std::map<unsigned, Literal>& carry,
               const std::map<unsigned, Literal>& row, unsigned width) {
  std::map<unsigned, Literal> next_sum, next_carry;
  const std::map<unsigned, Literal>* maps[] = {&sum, &carry, &row};
  std::vector<unsigned> weights;
  for (const auto* m : maps)
    for (const auto& [w, l] : *m) weights.push_back(w);
  std::sort(weights.begin(), weights.end());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
  for (unsigned w : weights) {
    std::vector<Literal> bits;
    for (const auto* m : maps) {
      auto it = m->find(w);
      if (it != m->end()) bits.push_back(it->second);
    }
    if (w + 1 >= width) {
      Literal s = kFalse;
      for (Literal l : bits) s = b.xor_(s, l);
      next_sum[w] = s;
      continue;
    }
    if (bits.size() == 1) {
      next_sum[w] = bits[0];
    } else if (bits.size() == 2) {
      auto [s, c] = b.half_adder(bits[0], bits[1]);
      next_sum[w] = s;
      next_carry[w + 1] = c;
    } else {
      auto [s, c] = b.full_adder(bits[0], bits[1], bits[2]);
      next_sum[w] = s;
      next_carry[w + 1] = c;
    }
  }
  sum = std::move(next_sum);
  carry = std::move(next_carry);
}

// Carry into each position (and the carry out) by recursive 4-bit lookahead.
std::vector<Literal> lookahead_carries(AigBuilder& b, const std::vector<Literal>& g, const std::vector<Literal>& p,
                                       Literal cin) {
  const std::size_t n = g.size();
  std::vector<Literal> c(n + 1);
  auto direct = [&](std::size_t lo, std::size_t hi, Literal in) {
    // Positions lo..hi-1 within one group, carry-in `in`.
    c[lo] = in;
    for (std::size_t k = lo + 1; k <= hi; ++k) {
      Literal acc = kFalse;
      for (std::size_t t = lo; t < k; ++t) {
        Literal term = g[t];
        for (std::size_t u = t + 1; u < k; ++u) term = b.and_(term, p[u]);
        acc = b.or_(acc, term);
      }
      Literal prop = in;
      for (std::size_t u = lo; u < k; ++u) prop = b.and_(prop, p[u]);
      c[k] = b.or_(acc, prop);
    }
  };
  if (n <= 4) {
    direct(0, n, cin);
    return c;
  }
  std::vector<Literal> gg, pp;
  for (std::size_t lo = 0; lo < n; lo += 4) {
    std::size_t hi = std::min(n, lo + 4);
    Literal G = kFalse;
    for (std::size_t t = lo; t < hi; ++t) {
      Literal term = g[t];
      for (std::size_t u = t + 1; u < hi; ++u) term = b.and_(term, p[u]);
      G = b.or_(G, term);
    }
    Literal P = kTrue;
    for (std::size_t u = lo; u < hi; ++u) P = b.and_(P, p[u]);
    gg.push_back(G);
    pp.push_back(P);
  }
  std::vector<Literal> group_c = lookahead_carries(b, gg, pp, cin);
  for (std::size_t k = 0, lo = 0; lo < n; ++k, lo += 4) direct(lo, std::min(n, lo + 4), group_c[k]);
  c[n] = group_c.back();
  return c;
}

// Drops gates outside every output cone and renumbers the rest consecutively.
Aig sweep(const Aig& aig, std::vector<NodeId>& old_to_new) {
  std::vector<std::uint8_t> live(aig.num_nodes(), 0);
  for (Literal l : aig.outputs()) live[l.node] = 1;
  auto gates = aig.gates();
  for (std::size_t k = gates.size(); k-- > 0;) {
    if (!live[gates[k].id]) continue;
    live[gates[k].left.node] = 1;
    live[gates[k].right.node] = 1;
  }
  old_to_new.assign(aig.num_nodes(), 0);
  Aig out;
  for (std::size_t i = 0; i < aig.num_inputs(); ++i) old_to_new[aig.inputs()[i]] = out.add_input(aig.input_name(i));
  auto map = [&](Literal l) { return Literal{old_to_new[l.node], l.negated}; };
  for (const Gate& g : gates)
    if (live[g.id]) old_to_new[g.id] = out.add_gate(map(g.left), map(g.right)).node;
  for (std::size_t o = 0; o < aig.num_outputs(); ++o) out.add_output(map(aig.outputs()[o]), aig.output_name(o));
  return out;
}

}  // namespace

GeneratedCircuit build_multiplier(const GenSpec& spec) {
  const unsigned n = spec.n_bits;
  if (n < 1) throw AigError("multiplier width must be at least 1");
  const unsigned width = 2 * n;
  AigBuilder b;
  std::vector<Literal> a(n), bb(n);
  for (unsigned i = 0; i < n; ++i) a[i] = b.input("a" + std::to_string(i));
  for (unsigned i = 0; i < n; ++i) bb[i] = b.input("b" + std::to_string(i));
  GeneratedCircuit out;

  if (n == 1) {
    Literal p = b.and_(a[0], bb[0]);
    out.pp_gates.push_back(p.node);
    b.output(p, "s0");
    b.output(kFalse, "s1");
    out.aig = b.take();
    return out;
  }

  // rows[j][w]: partial product bits of row j.
  std::vector<std::map<unsigned, Literal>> rows(n);
  std::map<unsigned, Literal> extra;
  for (unsigned j = 0; j < n; ++j) {
    for (unsigned i = 0; i < n; ++i) {
      Literal p = b.and_(a[i], bb[j]);
      out.pp_gates.push_back(p.node);
      bool negate = spec.is_signed && ((i == n - 1) != (j == n - 1));
      rows[j][i + j] = negate ? !p : p;
    }
  }
  if (spec.is_signed) {
    extra[n] = kTrue;
    extra[width - 1] = kTrue;
  }
  Literal chain_out = kFalse;
  if (spec.and_chain > 0) {
    if (2 * n < spec.and_chain + 1) throw AigError("not enough inputs for the requested AND chain");
    // q = a1*b(n-1) sits at weight n; q = q1 + k with k = q AND (other inputs).
    unsigned qi = 1, qj = n - 1;
    Literal q = rows[qj][qi + qj];
    std::vector<Literal> others;
    for (unsigned i = 0; i < n; ++i)
      if (i != qi) others.push_back(a[i]);
    for (unsigned j = 0; j < n; ++j)
      if (j != qj) others.push_back(bb[j]);
    Literal k = q;
    for (unsigned t = 0; t + 1 < spec.and_chain; ++t) {
      k = b.and_(k, others[t]);
      out.chain_gates.push_back(k.node);
    }
    rows[qj][qi + qj] = b.and_(q, !k);
    out.chain_gates.push_back(rows[qj][qi + qj].node);
    chain_out = k;
  }

  std::map<unsigned, Literal> sum = rows[0], carry;
  std::vector<Literal> outputs(width, kFalse);
  auto retire = [&](unsigned w) {
    auto it = sum.find(w);
    if (it != sum.end() && carry.find(w) == carry.end()) {
      outputs[w] = it->second;
      sum.erase(it);
    }
  };
  retire(0);
  for (unsigned j = 1; j < n; ++j) {
    csa_level(b, sum, carry, rows[j], width);
    retire(j);
  }
  if (!extra.empty()) csa_level(b, sum, carry, extra, width);

  // Final-stage adder over the remaining two vectors.
  const NodeId first_fsa = static_cast<NodeId>(b.aig().num_nodes());
  unsigned lo = width;
  for (const auto& [w, l] : sum) lo = std::min(lo, w);
  for (const auto& [w, l] : carry) lo = std::min(lo, w);
  if (spec.and_chain > 0 && lo != n) throw AigError("AND chain needs a final adder starting at weight n");
  if (lo < width) {
    std::vector<Literal> x, y;
    for (unsigned w = lo; w < width; ++w) {
      x.push_back(sum.count(w) ? sum[w] : kFalse);
      y.push_back(carry.count(w) ? carry[w] : kFalse);
    }
    const std::size_t m = x.size();
    if (spec.fsa == FsaKind::RippleCarry) {
      Literal c = chain_out;
      for (std::size_t k = 0; k < m; ++k) {
        if (k + 1 == m) {
          outputs[lo + k] = b.xor_(b.xor_(x[k], y[k]), c);
        } else {
          auto [s, co] = b.full_adder(x[k], y[k], c);
          outputs[lo + k] = s;
          c = co;
        }
      }
    } else {
      std::vector<Literal> g(m), p(m);
      for (std::size_t k = 0; k < m; ++k) {
        p[k] = b.xor_(x[k], y[k]);
        if (k + 1 < m) g[k] = b.and_(x[k], y[k]);
      }
      g[m - 1] = kFalse;  // the carry out of the top position is never used
      std::vector<Literal> c = lookahead_carries(b, g, p, chain_out);
      for (std::size_t k = 0; k < m; ++k) outputs[lo + k] = b.xor_(p[k], c[k]);
    }
  }
  for (unsigned w = 0; w < width; ++w) b.output(outputs[w], "s" + std::to_string(w));
  Aig raw = b.take();
  for (const Gate& g : raw.gates())
    if (g.id >= first_fsa) out.fsa_gates.push_back(g.id);
  std::vector<NodeId> renumber;
  out.aig = sweep(raw, renumber);
  for (auto* list : {&out.pp_gates, &out.fsa_gates, &out.chain_gates}) {
    std::vector<NodeId> mapped;
    for (NodeId id : *list)
      if (renumber[id] != 0) mapped.push_back(renumber[id]);
    std::sort(mapped.begin(), mapped.end());
    mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
    *list = std::move(mapped);
  }
  return out;
}

std::string gen_multiplier(const GenSpec& spec) {
  Aig aig = build_multiplier(spec).aig;
  if (spec.fault) aig = inject_fault(aig, *spec.fault);
  return write_aag(aig);
}

Aig build_adder(unsigned n) {
  if (n < 1) throw AigError("adder width must be at least 1");
  AigBuilder b;
  std::vector<Literal> a(n), c(n);
  for (unsigned i = 0; i < n; ++i) a[i] = b.input("a" + std::to_string(i));
  for (unsigned i = 0; i < n; ++i) c[i] = b.input("b" + std::to_string(i));
  Literal carry = kFalse;
  std::vector<Literal> sums;
  for (unsigned i = 0; i < n; ++i) {
    auto [s, co] = b.full_adder(a[i], c[i], carry);
    sums.push_back(s);
    carry = co;
  }
  for (unsigned i = 0; i < n; ++i) b.output(sums[i], "s" + std::to_string(i));
  b.output(carry, "s" + std::to_string(n));
  return b.take();
}

FaultKind parse_fault_kind(const std::string& name) {
  if (name == "flip-polarity") return FaultKind::FlipPolarity;
  if (name == "swap-children") return FaultKind::SwapChildren;
  if (name == "constant-gate") return FaultKind::ConstantGate;
  throw std::invalid_argument("unknown fault kind '" + name + "'");
}

std::string fault_kind_name(FaultKind kind) {
  switch (kind) {
    case FaultKind::FlipPolarity: return "flip-polarity";
    case FaultKind::SwapChildren: return "swap-children";
    case FaultKind::ConstantGate: return "constant-gate";
  }
  return "?";
}

bool outputs_equivalent(const Aig& x, const Aig& y, std::uint64_t seed, unsigned random_words) {
  if (x.num_inputs() != y.num_inputs() || x.num_outputs() != y.num_outputs()) return false;
  const std::size_t ni = x.num_inputs();
  std::vector<std::uint64_t> words(ni);
  auto compare = [&]() {
    auto vx = x.simulate_words(words);
    auto vy = y.simulate_words(words);
    for (std::size_t o = 0; o < x.num_outputs(); ++o)
      if (Aig::literal_word(vx, x.outputs()[o]) != Aig::literal_word(vy, y.outputs()[o])) return false;
    return true;
  };
  if (ni <= 20) {
    // Inputs 0..5 vary inside a word, the rest across words.
    const std::uint64_t patterns = std::uint64_t{1} << ni;
    const std::uint64_t batches = std::max<std::uint64_t>(1, patterns >> 6);
    for (std::uint64_t batch = 0; batch < batches; ++batch) {
      for (std::size_t i = 0; i < ni; ++i) {
        if (i < 6) {
          std::uint64_t w = 0;
          for (unsigned bit = 0; bit < 64; ++bit)
            if ((bit >> i) & 1u) w |= std::uint64_t{1} << bit;
          words[i] = w;
        } else {
          words[i] = ((batch >> (i - 6)) & 1u) ? ~std::uint64_t{0} : 0;
        }
      }
      if (!compare()) return false;
    }
    return true;
  }
  std::mt19937_64 rng(seed);
  for (unsigned r = 0; r < random_words; ++r) {
    for (auto& w : words) w = rng();
    if (!compare()) return false;
  }
  return true;
}

Aig inject_fault(const Aig& aig, const Fault& fault) {
  if (aig.num_gates() == 0) throw AigError("circuit has no gate to mutate");
  std::mt19937_64 rng(fault.seed);
  auto gates = aig.gates();
  for (unsigned attempt = 0; attempt < 4096; ++attempt) {
    const Gate& g = gates[rng() % gates.size()];
    std::optional<Aig> mutant;
    switch (fault.kind) {
      case FaultKind::FlipPolarity:
        mutant = (rng() & 1) ? aig.with_gate(g.id, !g.left, g.right) : aig.with_gate(g.id, g.left, !g.right);
        break;
      case FaultKind::ConstantGate:
        mutant = (rng() & 1) ? aig.with_gate(g.id, kTrue, kTrue) : aig.with_gate(g.id, kFalse, kFalse);
        break;
      case FaultKind::SwapChildren: {
        // Exchange one child with a child of another gate, keeping the order acyclic.
        const Gate& h = gates[rng() % gates.size()];
        if (h.id == g.id) continue;
        Literal from_h = (rng() & 1) ? h.left : h.right;
        auto precedes = [&](Literal child, NodeId parent) {
          return !aig.is_gate(child.node) || aig.index(child.node) < aig.index(parent);
        };
        if (!precedes(from_h, g.id) || !precedes(g.right, h.id)) continue;
        if (from_h == g.right) continue;
        Literal h_left = h.left == from_h ? g.right : h.left;
        Literal h_right = h.left == from_h ? h.right : g.right;
        mutant = aig.with_gate(g.id, g.left, from_h).with_gate(h.id, h_left, h_right);
        break;
      }
    }
    if (mutant && !outputs_equivalent(aig, *mutant, fault.seed)) return *mutant;
  }
  throw AigError("no observable mutation found");
}

}  // namespace mmv
