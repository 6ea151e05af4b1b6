#include "mmverify/encoding.hpp"

#include <algorithm>
#include <map>

namespace mmv {

// ---------------------------------------------------------------------------
// Exact specifications

namespace {

bool symbol_value(const Symbol& s, const Aig& aig, std::span<const std::uint8_t> values) {
  switch (s.kind) {
    case Symbol::Kind::Input: return values[aig.inputs()[s.index]] != 0;
    case Symbol::Kind::Output: return Aig::literal_value(values, aig.outputs()[s.index]);
    case Symbol::Kind::Node: return values[s.index] != 0;
  }
  return false;
}

std::vector<ExactTerm> collect(std::map<std::vector<Symbol>, BigInt> acc) {
  std::vector<ExactTerm> out;
  for (auto& [factors, c] : acc)
    if (c != 0) out.push_back({c, factors});
  return out;
}

void add_term(std::map<std::vector<Symbol>, BigInt>& acc, std::vector<Symbol> factors, const BigInt& c) {
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  acc[std::move(factors)] += c;
}

// Symbol of a node: inputs by position, gates by id.
Symbol node_symbol(const Aig& aig, NodeId id) {
  if (aig.is_input(id)) return {Symbol::Kind::Input, aig.index(id)};
  return {Symbol::Kind::Node, id};
}

// Replaces output pins by their literals: g, 1 - g or a constant.
std::vector<ExactTerm> fold_outputs(const std::vector<ExactTerm>& terms, const Aig& aig) {
  std::map<std::vector<Symbol>, BigInt> acc;
  for (const ExactTerm& t : terms) {
    // Expand the product of (fixed factors) * Π over output factors of (c0 + c1*x).
    std::vector<std::pair<std::vector<Symbol>, BigInt>> partial{{{}, t.coeff}};
    for (const Symbol& s : t.factors) {
      std::vector<std::pair<std::vector<Symbol>, BigInt>> next;
      if (s.kind != Symbol::Kind::Output) {
        for (auto& [f, c] : partial) {
          f.push_back(s);
          next.emplace_back(std::move(f), c);
        }
      } else {
        Literal lit = aig.outputs()[s.index];
        for (auto& [f, c] : partial) {
          if (lit.is_constant()) {
            if (lit.negated) next.emplace_back(f, c);
          } else if (!lit.negated) {
            auto g = f;
            g.push_back(node_symbol(aig, lit.node));
            next.emplace_back(std::move(g), c);
          } else {
            next.emplace_back(f, c);
            auto g = f;
            g.push_back(node_symbol(aig, lit.node));
            next.emplace_back(std::move(g), -c);
          }
        }
      }
      partial = std::move(next);
    }
    for (auto& [f, c] : partial) add_term(acc, std::move(f), c);
  }
  return collect(std::move(acc));
}

}  // namespace

BigInt evaluate_exact(const std::vector<ExactTerm>& terms, const Aig& aig, std::span<const std::uint8_t> node_values) {
  BigInt sum = 0;
  for (const ExactTerm& t : terms) {
    bool on = std::all_of(t.factors.begin(), t.factors.end(),
                          [&](const Symbol& s) { return symbol_value(s, aig, node_values); });
    if (on) sum += t.coeff;
  }
  return sum;
}

PinMap detect_pins(const Aig& aig, unsigned n, const std::string& order) {
  PinMap pins;
  if (order == "auto" && aig.has_symbols()) {
    std::map<std::string, std::size_t> in, out;
    for (std::size_t i = 0; i < aig.num_inputs(); ++i) in[aig.input_name(i)] = i;
    for (std::size_t i = 0; i < aig.num_outputs(); ++i) out[aig.output_name(i)] = i;
    bool complete = true;
    for (unsigned i = 0; i < n && complete; ++i) {
      auto a = in.find("a" + std::to_string(i));
      auto b = in.find("b" + std::to_string(i));
      complete = a != in.end() && b != in.end();
      if (complete) {
        pins.a.push_back(a->second);
        pins.b.push_back(b->second);
      }
    }
    for (unsigned i = 0; i < 2 * n && complete; ++i) {
      auto s = out.find("s" + std::to_string(i));
      complete = s != out.end();
      if (complete) pins.s.push_back(s->second);
    }
    if (complete) {
      pins.how = "symbols";
      return pins;
    }
    pins = PinMap{};
  }
  if (order == "interleaved") {
    for (unsigned i = 0; i < n; ++i) {
      pins.a.push_back(2 * i);
      pins.b.push_back(2 * i + 1);
    }
    pins.how = "interleaved";
  } else if (order == "sequential" || order == "auto") {
    for (unsigned i = 0; i < n; ++i) {
      pins.a.push_back(i);
      pins.b.push_back(n + i);
    }
    pins.how = "sequential";
  } else {
    throw EncodingError("unknown pin order '" + order + "'");
  }
  for (unsigned i = 0; i < 2 * n; ++i) pins.s.push_back(i);
  return pins;
}

std::vector<ExactTerm> multiplier_terms(unsigned n, SpecMode mode, const PinMap& pins) {
  if (mode == SpecMode::Custom) throw EncodingError("custom mode has no multiplier specification");
  const bool is_signed = mode == SpecMode::Signed;
  auto weight = [&](unsigned i, unsigned width) {
    BigInt w = BigInt(1) << i;
    return is_signed && i + 1 == width ? BigInt(-w) : w;
  };
  std::map<std::vector<Symbol>, BigInt> acc;
  for (unsigned i = 0; i < 2 * n; ++i)
    add_term(acc, {{Symbol::Kind::Output, static_cast<std::uint32_t>(pins.s[i])}}, weight(i, 2 * n));
  for (unsigned i = 0; i < n; ++i) {
    for (unsigned j = 0; j < n; ++j) {
      Symbol a{Symbol::Kind::Input, static_cast<std::uint32_t>(pins.a[i])};
      Symbol b{Symbol::Kind::Input, static_cast<std::uint32_t>(pins.b[j])};
      add_term(acc, {a, b}, -weight(i, n) * weight(j, n));
    }
  }
  return collect(std::move(acc));
}

std::vector<ExactTerm> custom_terms(const std::vector<NamedTerm>& terms, const Aig& aig, const PinMap* pins) {
  std::map<std::string, Symbol> names;
  auto number_after = [](const std::string& s, std::size_t prefix) -> std::optional<std::uint32_t> {
    if (s.size() <= prefix) return std::nullopt;
    std::uint64_t v = 0;
    for (std::size_t i = prefix; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + static_cast<std::uint64_t>(s[i] - '0');
      if (v > 0xffffffffu) return std::nullopt;
    }
    return static_cast<std::uint32_t>(v);
  };
  for (std::size_t i = 0; i < aig.num_inputs(); ++i)
    if (!aig.input_name(i).empty()) names.emplace(aig.input_name(i), Symbol{Symbol::Kind::Input, static_cast<std::uint32_t>(i)});
  for (std::size_t i = 0; i < aig.num_outputs(); ++i)
    if (!aig.output_name(i).empty()) names.emplace(aig.output_name(i), Symbol{Symbol::Kind::Output, static_cast<std::uint32_t>(i)});
  auto resolve = [&](const std::string& name) -> Symbol {
    if (auto it = names.find(name); it != names.end()) return it->second;
    char head = name.empty() ? '\0' : name[0];
    if (auto k = number_after(name, 1)) {
      if (pins && (head == 'a' || head == 'b') && *k < pins->a.size())
        return {Symbol::Kind::Input, static_cast<std::uint32_t>(head == 'a' ? pins->a[*k] : pins->b[*k])};
      if (pins && head == 's' && *k < pins->s.size()) return {Symbol::Kind::Output, static_cast<std::uint32_t>(pins->s[*k])};
      if (head == 'i' && *k < aig.num_inputs()) return {Symbol::Kind::Input, *k};
      if (head == 'o' && *k < aig.num_outputs()) return {Symbol::Kind::Output, *k};
      if (head == 'n' && *k < aig.num_nodes() && aig.kind(*k) != NodeKind::Unused && *k != 0)
        return node_symbol(aig, *k);
    }
    throw EncodingError("unknown variable '" + name + "' in specification");
  };
  std::map<std::vector<Symbol>, BigInt> acc;
  for (const NamedTerm& t : terms) {
    std::vector<Symbol> factors;
    for (const auto& [name, exp] : t.factors) factors.push_back(resolve(name));
    add_term(acc, std::move(factors), t.coeff);
  }
  return collect(std::move(acc));
}

BigInt coefficient_bound(const std::vector<ExactTerm>& terms) {
  BigInt sum = 0;
  for (const ExactTerm& t : terms) sum += t.coeff < 0 ? BigInt(-t.coeff) : t.coeff;
  return sum;
}

PrimeBasis choose_primes(const BigInt& bound, unsigned prime_bits) {
  if (prime_bits < 8 || prime_bits > 31) throw EncodingError("prime width must be in [8, 31]");
  return PrimeBasis::for_bound(bound, prime_bits);
}

// ---------------------------------------------------------------------------
// Variable layout

VarLayout::VarLayout(const Aig& aig, std::size_t num_extensions) {
  node_var_.assign(aig.num_nodes(), 0);
  var_node_.push_back(0);
  std::vector<NodeId> inputs(aig.inputs().begin(), aig.inputs().end());
  std::sort(inputs.begin(), inputs.end());
  for (NodeId id : inputs) {
    node_var_[id] = static_cast<Var>(var_node_.size());
    var_node_.push_back(id);
  }
  first_ext_ = static_cast<Var>(var_node_.size());
  for (std::size_t k = 0; k < num_extensions; ++k) var_node_.push_back(0);
  first_gate_ = static_cast<Var>(var_node_.size());
  for (const Gate& g : aig.gates()) {
    node_var_[g.id] = static_cast<Var>(var_node_.size());
    var_node_.push_back(g.id);
  }
  first_output_ = static_cast<Var>(var_node_.size());
  for (std::size_t o = 0; o < aig.num_outputs(); ++o) var_node_.push_back(0);
  num_vars_ = var_node_.size();
}

std::vector<std::uint32_t> VarLayout::ranks() const {
  std::vector<std::uint32_t> r(num_vars_);
  for (std::size_t v = 0; v < num_vars_; ++v) r[v] = static_cast<std::uint32_t>(v);
  return r;
}

std::string CircuitEncoding::var_name(const Aig& aig, Var v) const {
  if (layout.is_output_var(v)) {
    std::size_t o = layout.output_index(v);
    const std::string& n = aig.output_name(o);
    return n.empty() ? "o" + std::to_string(o) : n;
  }
  if (layout.is_ext_var(v)) return "v" + std::to_string(layout.ext_index(v));
  NodeId id = layout.node_of(v);
  if (aig.is_input(id)) {
    const std::string& n = aig.input_name(aig.index(id));
    return n.empty() ? "i" + std::to_string(aig.index(id)) : n;
  }
  return "g" + std::to_string(2 * id);
}

// ---------------------------------------------------------------------------
// Polynomials

MmPoly literal_poly(const RingPtr& ring, const VarLayout& layout, Literal lit) {
  const std::size_t k = ring->basis.size();
  if (lit.is_constant()) return lit.negated ? MmPoly::constant(ring, CoeffVec(k, 1)) : MmPoly(ring);
  MmPoly x = MmPoly::variable(ring, layout.node_var(lit.node));
  if (!lit.negated) return x;
  return mm_sub(MmPoly::constant(ring, CoeffVec(k, 1)), x);
}

MmPoly gate_polynomial(const RingPtr& ring, const VarLayout& layout, const Gate& gate) {
  MmPoly product = mm_mul(literal_poly(ring, layout, gate.left), literal_poly(ring, layout, gate.right), true);
  return mm_sub(MmPoly::variable(ring, layout.node_var(gate.id)), product);
}

std::vector<MmPoly> boolean_polys(const RingPtr& ring, std::span<const Var> inputs) {
  std::vector<MmPoly> out;
  const std::size_t k = ring->basis.size();
  for (Var v : inputs) {
    std::vector<std::pair<Monomial, CoeffVec>> terms;
    terms.emplace_back(Monomial::variable(v, 2), CoeffVec(k, 1));
    terms.emplace_back(Monomial::variable(v), mm_neg(CoeffVec(k, 1), ring->basis));
    out.push_back(MmPoly::from_terms(ring, std::move(terms)));
  }
  return out;
}

Linearized linearize(const MmPoly& spec, const std::function<Var(const Monomial&)>& allocate) {
  std::vector<Monomial> nonlinear;
  for (std::size_t t = 0; t < spec.size(); ++t)
    if (spec.monomial(t).degree() > 1) nonlinear.push_back(spec.monomial(t));
  // Terms are stored descending; allocate in ascending order.
  std::reverse(nonlinear.begin(), nonlinear.end());
  Linearized out{MmPoly(spec.ring()), {}};
  std::vector<std::pair<Monomial, CoeffVec>> terms;
  std::map<std::size_t, Var> assigned;
  for (const Monomial& m : nonlinear) {
    Var v = allocate(m);
    MmPoly poly = mm_sub(MmPoly::variable(spec.ring(), v),
                         MmPoly::from_terms(spec.ring(), {{m, CoeffVec(spec.lanes(), 1)}}));
    out.extensions.push_back({v, m, std::move(poly)});
  }
  for (std::size_t t = 0; t < spec.size(); ++t) {
    const Monomial& m = spec.monomial(t);
    if (m.degree() <= 1) {
      terms.emplace_back(m, spec.coeff_vec(t));
      continue;
    }
    auto it = std::find_if(out.extensions.begin(), out.extensions.end(),
                           [&](const ExtensionVar& e) { return e.monomial == m; });
    terms.emplace_back(Monomial::variable(it->var), spec.coeff_vec(t));
  }
  out.spec = MmPoly::from_terms(spec.ring(), std::move(terms));
  return out;
}

MmPoly delinearize(const MmPoly& spec, const std::vector<ExtensionVar>& extensions) {
  std::vector<std::pair<Monomial, CoeffVec>> terms;
  for (std::size_t t = 0; t < spec.size(); ++t) {
    const Monomial& m = spec.monomial(t);
    Monomial replaced;
    std::vector<Factor> keep;
    for (const Factor& f : m.factors()) {
      auto it = std::find_if(extensions.begin(), extensions.end(), [&](const ExtensionVar& e) { return e.var == f.var; });
      if (it == extensions.end()) {
        keep.push_back(f);
      } else {
        for (std::uint32_t e = 0; e < f.exp; ++e) replaced = replaced * it->monomial;
      }
    }
    terms.emplace_back((Monomial(std::move(keep)) * replaced).boolean_reduced(), spec.coeff_vec(t));
  }
  return MmPoly::from_terms(spec.ring(), std::move(terms));
}

// ---------------------------------------------------------------------------

namespace {

MmPoly exact_to_poly(const std::vector<ExactTerm>& terms, const RingPtr& ring, const VarLayout& layout, const Aig& aig) {
  std::vector<std::pair<Monomial, CoeffVec>> out;
  for (const ExactTerm& t : terms) {
    std::vector<Factor> factors;
    for (const Symbol& s : t.factors) {
      Var v = 0;
      switch (s.kind) {
        case Symbol::Kind::Input: v = layout.node_var(aig.inputs()[s.index]); break;
        case Symbol::Kind::Output: v = layout.output_var(s.index); break;
        case Symbol::Kind::Node: v = layout.node_var(s.index); break;
      }
      factors.push_back({v, 1});
    }
    out.emplace_back(Monomial(std::move(factors)).boolean_reduced(), mm_reduce_scalar(t.coeff, ring->basis));
  }
  return MmPoly::from_terms(ring, std::move(out));
}

}  // namespace

Problem build_problem(const Aig& aig, const SpecOptions& options) {
  Problem p;
  SpecTask& task = p.task;
  task.mode = options.mode;
  if (options.mode == SpecMode::Custom) {
    if (options.custom_text.empty()) throw EncodingError("custom mode needs a specification polynomial");
    const PinMap* pins = nullptr;
    if (aig.num_inputs() % 2 == 0 && aig.num_outputs() == aig.num_inputs() && aig.num_inputs() > 0) {
      task.n_bits = static_cast<unsigned>(aig.num_inputs() / 2);
      task.pins = detect_pins(aig, task.n_bits, options.pin_order);
      pins = &task.pins;
    }
    task.exact = custom_terms(parse_poly_text(options.custom_text), aig, pins);
    task.bound = coefficient_bound(task.exact);
  } else {
    if (aig.num_inputs() == 0 || aig.num_inputs() % 2 != 0 || aig.num_outputs() != aig.num_inputs())
      throw EncodingError("multiplier mode needs 2n inputs and 2n outputs, got " + std::to_string(aig.num_inputs()) +
                          " inputs and " + std::to_string(aig.num_outputs()) + " outputs");
    task.n_bits = static_cast<unsigned>(aig.num_inputs() / 2);
    task.pins = detect_pins(aig, task.n_bits, options.pin_order);
    task.exact = multiplier_terms(task.n_bits, options.mode, task.pins);
    task.bound = BigInt(1) << (2 * task.n_bits);
  }

  PrimeBasis basis = choose_primes(task.bound, options.prime_bits);
  std::vector<ExactTerm> folded = fold_outputs(task.exact, aig);
  std::size_t num_ext = 0;
  for (const ExactTerm& t : folded)
    if (t.factors.size() > 1) ++num_ext;

  CircuitEncoding& enc = p.enc;
  enc.layout = VarLayout(aig, num_ext);
  enc.ring = make_ring(std::move(basis));
  const RingPtr& ring = enc.ring;

  task.original_spec = exact_to_poly(task.exact, ring, enc.layout, aig);
  MmPoly folded_poly = exact_to_poly(folded, ring, enc.layout, aig);
  std::size_t next_ext = 0;
  Linearized lin = linearize(folded_poly, [&](const Monomial&) { return enc.layout.ext_var(next_ext++); });
  task.spec = std::move(lin.spec);
  enc.extensions = std::move(lin.extensions);

  for (const Gate& g : aig.gates()) enc.gate_polys.push_back(gate_polynomial(ring, enc.layout, g));
  for (std::size_t o = 0; o < aig.num_outputs(); ++o)
    enc.output_polys.push_back(mm_sub(MmPoly::variable(ring, enc.layout.output_var(o)),
                                      literal_poly(ring, enc.layout, aig.outputs()[o])));
  std::vector<Var> input_vars;
  for (NodeId id : aig.inputs()) input_vars.push_back(enc.layout.node_var(id));
  std::sort(input_vars.begin(), input_vars.end(), std::greater<>());
  enc.boolean_polys = boolean_polys(ring, input_vars);
  return p;
}

bool violates_spec(const Problem& p, const Aig& aig, std::span<const std::uint8_t> inputs) {
  auto values = aig.simulate(inputs);
  return evaluate_exact(p.task.exact, aig, values) != 0;
}

}  // namespace mmv
