#pragma once

#include <algorithm>
#include <map>
#include <string>

#include "mmverify/benchgen.hpp"
#include "mmverify/encoding.hpp"
#include "mmverify/sampler.hpp"

namespace mmv::testing {

// Two-bit multiplier: partial products, half adders, and an XOR built from NORs.
inline const char* kTwoBitMultiplier =
    "aag 14 4 0 4 10\n"
    "2\n4\n6\n8\n"
    "10\n20\n28\n24\n"
    "10 4 2\n12 4 6\n14 8 2\n16 14 12\n18 15 13\n20 19 17\n22 8 6\n24 22 16\n26 23 17\n28 27 25\n"
    "i0 a0\ni1 b0\ni2 a1\ni3 b1\no0 s0\no1 s1\no2 s2\no3 s3\n";

// Parses `text` over the variable names of an encoding.
inline MmPoly poly_from_text(const Problem& p, const Aig& aig, const std::string& text) {
  std::map<std::string, Var> names;
  for (Var v = 1; v < p.enc.layout.num_vars(); ++v) names[p.enc.var_name(aig, v)] = v;
  std::vector<std::pair<Monomial, CoeffVec>> terms;
  for (const NamedTerm& t : parse_poly_text(text)) {
    std::vector<Factor> f;
    for (const auto& [name, e] : t.factors) f.push_back({names.at(name), e});
    terms.emplace_back(Monomial(std::move(f)), mm_reduce_scalar(t.coeff, p.enc.ring->basis));
  }
  return MmPoly::from_terms(p.enc.ring, std::move(terms));
}

// Full adder over inputs x, y, z with outputs s, c.
struct FullAdder {
  Aig aig;
  Literal x, y, z, s, c;  // c is a negated literal (an OR)
  Subcircuit sc;          // every gate, boundary x y z
};

inline FullAdder full_adder() {
  AigBuilder b;
  Literal x = b.input("x"), y = b.input("y"), z = b.input("z");
  auto [s, c] = b.full_adder(x, y, z);
  b.output(s, "s");
  b.output(c, "c");
  FullAdder fa{b.take(), x, y, z, s, c, {}};
  std::vector<NodeId> gates;
  for (const Gate& g : fa.aig.gates()) gates.push_back(g.id);
  fa.sc = close_subcircuit(fa.aig, gates);
  return fa;
}

// Value of a column holding `lit`, honoring its polarity.
inline int literal_bit(const SampleSpace& space, const Sample& smp, Literal lit) {
  return smp.values[*space.column(lit.node)] ^ (lit.negated ? 1 : 0);
}

// AND of n fresh inputs, built as a left-deep chain.
inline Aig and_cone(unsigned n) {
  Aig aig;
  Literal acc{aig.add_input("x0"), false};
  for (unsigned i = 1; i < n; ++i) acc = aig.add_gate(acc, Literal{aig.add_input("x" + std::to_string(i)), false});
  aig.add_output(acc, "y");
  return aig;
}

// Exact multilinear polynomial: sorted variable set -> integer.
using ExactPoly = std::map<std::vector<Var>, BigInt>;

inline void add_term(ExactPoly& f, std::vector<Var> vars, const BigInt& c) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  BigInt& slot = f[vars];
  slot += c;
  if (slot == 0) f.erase(vars);
}

inline ExactPoly exact_literal(const VarLayout& layout, Literal lit) {
  ExactPoly f;
  if (lit.is_constant()) {
    if (lit.negated) add_term(f, {}, 1);
    return f;
  }
  if (lit.negated) add_term(f, {}, 1);
  add_term(f, {layout.node_var(lit.node)}, lit.negated ? -1 : 1);
  return f;
}

inline ExactPoly exact_mul(const ExactPoly& a, const ExactPoly& b) {
  ExactPoly out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      std::vector<Var> m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      add_term(out, m, ca * cb);
    }
  return out;
}

// Unsigned multiplier spec over output literals, reduced by every gate in
// reverse topological order, all in exact integers.
inline ExactPoly exact_normal_form(const Aig& aig, const VarLayout& layout, unsigned n) {
  ExactPoly spec;
  std::vector<NodeId> a(n), b(n);
  for (std::size_t i = 0; i < aig.num_inputs(); ++i) {
    const std::string& name = aig.input_name(i);
    (name[0] == 'a' ? a : b)[std::stoul(name.substr(1))] = aig.inputs()[i];
  }
  for (std::size_t o = 0; o < aig.num_outputs(); ++o)
    for (const auto& [m, c] : exact_literal(layout, aig.outputs()[o])) add_term(spec, m, c * (BigInt(1) << o));
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j)
      add_term(spec, {layout.node_var(a[i]), layout.node_var(b[j])}, -(BigInt(1) << (i + j)));
  auto gates = aig.gates();
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    Var g = layout.node_var(it->id);
    ExactPoly tail = exact_mul(exact_literal(layout, it->left), exact_literal(layout, it->right));
    ExactPoly next;
    for (const auto& [m, c] : spec) {
      if (!std::binary_search(m.begin(), m.end(), g)) {
        add_term(next, m, c);
        continue;
      }
      std::vector<Var> rest;
      for (Var v : m)
        if (v != g) rest.push_back(v);
      for (const auto& [mt, ct] : tail) {
        std::vector<Var> merged = rest;
        merged.insert(merged.end(), mt.begin(), mt.end());
        add_term(next, merged, c * ct);
      }
    }
    spec = std::move(next);
  }
  return spec;
}

inline Monomial monomial_of(const std::vector<Var>& vars) {
  std::vector<Factor> f;
  for (Var v : vars) f.push_back({v, 1});
  return Monomial(std::move(f));
}

}  // namespace mmv::testing
