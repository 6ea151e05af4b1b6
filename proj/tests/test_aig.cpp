#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "mmverify/aig.hpp"
#include "mmverify/benchgen.hpp"

using namespace mmv;
using mmv::testing::kTwoBitMultiplier;

namespace {

std::uint64_t output_word(const Aig& aig, const std::vector<std::uint8_t>& vals) {
  std::uint64_t w = 0;
  for (std::size_t i = 0; i < aig.num_outputs(); ++i)
    if (Aig::literal_value(vals, aig.outputs()[i])) w |= std::uint64_t{1} << i;
  return w;
}

std::int64_t sign_extend(std::uint64_t v, unsigned bits) {
  if (bits < 64 && (v >> (bits - 1)) & 1) return static_cast<std::int64_t>(v) - (std::int64_t{1} << bits);
  return static_cast<std::int64_t>(v);
}

std::size_t input_pos(const Aig& aig, const std::string& name) {
  for (std::size_t i = 0; i < aig.num_inputs(); ++i)
    if (aig.input_name(i) == name) return i;
  throw std::runtime_error("no input " + name);
}

// Exhaustive multiplier check against integer products, pins found by name.
bool multiplies(const Aig& aig, unsigned n, bool is_signed) {
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << (2 * n)); ++x) {
    std::vector<std::uint8_t> in(2 * n);
    for (unsigned i = 0; i < n; ++i) {
      in[input_pos(aig, "a" + std::to_string(i))] = (x >> i) & 1;
      in[input_pos(aig, "b" + std::to_string(i))] = (x >> (n + i)) & 1;
    }
    std::uint64_t a = x & ((1u << n) - 1), b = x >> n;
    std::uint64_t got = output_word(aig, aig.simulate(in));
    if (is_signed) {
      std::int64_t p = sign_extend(a, n) * sign_extend(b, n);
      if (sign_extend(got, 2 * n) != p) return false;
    } else if (got != a * b) {
      return false;
    }
  }
  return true;
}


}  // namespace

TEST(Parse, SingleAnd) {
  Aig aig = parse_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n");
  EXPECT_EQ(aig.num_inputs(), 2u);
  EXPECT_EQ(std::vector<NodeId>(aig.inputs().begin(), aig.inputs().end()), (std::vector<NodeId>{1, 2}));
  ASSERT_EQ(aig.num_gates(), 1u);
  EXPECT_EQ(aig.gate(3).left, (Literal{2, false}));
  EXPECT_EQ(aig.gate(3).right, (Literal{1, false}));
  EXPECT_EQ(aig.outputs()[0], (Literal{3, false}));
}

TEST(Parse, TwoBitMultiplier) {
  Aig aig = parse_aiger(kTwoBitMultiplier);
  EXPECT_EQ(aig.num_inputs(), 4u);
  EXPECT_EQ(aig.num_gates(), 10u);
  EXPECT_EQ(aig.num_outputs(), 4u);
  EXPECT_EQ(aig.input_name(2), "a1");
  EXPECT_EQ(aig.output_name(3), "s3");
  EXPECT_EQ(aig.gate(14).left, (Literal{13, true}));
  EXPECT_EQ(aig.gate(14).right, (Literal{12, true}));
  EXPECT_TRUE(multiplies(aig, 2, false));
}

TEST(Parse, Errors) {
  auto kind_of = [](const std::string& text) {
    try {
      parse_aiger(text);
    } catch (const ParseError& e) {
      return std::optional<ParseError::Kind>(e.kind());
    }
    return std::optional<ParseError::Kind>();
  };
  EXPECT_EQ(kind_of("aag 3 2 0 1 1\n2\n4\n6\n99 4 2\n"), ParseError::Kind::LiteralOutOfRange);
  EXPECT_EQ(kind_of("agg 3 2 0 1 1\n"), ParseError::Kind::MalformedHeader);
  EXPECT_EQ(kind_of("aag 3 2 0 1 1\n2\n4\n"), ParseError::Kind::Truncated);
  EXPECT_EQ(kind_of("aag 4 1 0 1 2\n2\n6\n6 8 2\n8 6 2\n"), ParseError::Kind::Cycle);
  EXPECT_EQ(kind_of("aag 4 1 0 1 1\n2\n6\n6 8 2\n"), ParseError::Kind::UndefinedLiteral);
  EXPECT_EQ(kind_of("aag 3 1 1 1 1\n2\n4 2\n6\n6 4 2\n"), ParseError::Kind::Unsupported);
  try {
    parse_aiger("aag 3 2 0 1 1\n2\n4\n6\n99 4 2\n");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(Parse, CommentsAndConstants) {
  Aig aig = parse_aiger("aag 2 1 0 2 1\n2\n4\n1\n4 3 1\ni0 x\nc\nanything\n");
  EXPECT_EQ(aig.outputs()[1], kTrue);
  EXPECT_EQ(aig.input_name(0), "x");
}

TEST(Parse, RoundTrip) {
  Aig aig = parse_aiger(kTwoBitMultiplier);
  Aig again = parse_aiger(write_aag(aig));
  EXPECT_EQ(aig, again);
  for (unsigned n : {3u, 5u}) {
    Aig m = build_multiplier({n, FsaKind::CarryLookahead}).aig;
    EXPECT_EQ(parse_aiger(write_aag(m)), m);
  }
}

TEST(Parse, BinaryFormat) {
  // aig 3 2 0 1 1: output 6, gate 6 = 4 & 2 encoded as deltas 2, 2.
  std::string bin = "aig 3 2 0 1 1\n6\n";
  bin.push_back(static_cast<char>(2));
  bin.push_back(static_cast<char>(2));
  Aig aig = parse_aiger(bin);
  EXPECT_EQ(aig.num_gates(), 1u);
  EXPECT_EQ(aig.gate(3).left, (Literal{2, false}));
}

TEST(Ranking, GatesAboveFanins) {
  Aig aig = parse_aiger(kTwoBitMultiplier);
  Ranking r = reverse_topological_ranking(aig);
  for (const Gate& g : aig.gates()) {
    EXPECT_GT(r.node_rank[g.id], r.node_rank[g.left.node]);
    EXPECT_GT(r.node_rank[g.id], r.node_rank[g.right.node]);
  }
  // b1 > a1 > b0 > a0 lowest; outputs above every gate.
  EXPECT_GT(r.node_rank[4], r.node_rank[3]);
  EXPECT_GT(r.node_rank[3], r.node_rank[2]);
  EXPECT_GT(r.node_rank[2], r.node_rank[1]);
  for (NodeId id = 5; id <= 14; ++id) EXPECT_GT(r.node_rank[id], r.node_rank[4]);
  EXPECT_GT(r.node_rank[14], r.node_rank[13]);
  EXPECT_GT(r.node_rank[13], r.node_rank[12]);
  std::uint32_t top = *std::max_element(r.node_rank.begin(), r.node_rank.end());
  for (std::size_t o = 0; o < 4; ++o) EXPECT_GT(r.output_rank[o], top);
  EXPECT_LT(r.output_rank[0], r.output_rank[3]);
  std::set<std::uint32_t> all(r.node_rank.begin(), r.node_rank.end());
  all.insert(r.output_rank.begin(), r.output_rank.end());
  EXPECT_EQ(all.size(), r.node_rank.size() + r.output_rank.size());
}

TEST(Cuts, InputsAndAnd) {
  Aig aig = parse_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 4 2\n");
  auto cuts = enumerate_cuts(aig);
  ASSERT_EQ(cuts[1].size(), 1u);
  EXPECT_EQ(cuts[1][0].leaves, std::vector<NodeId>{1});
  EXPECT_EQ(cuts[1][0].truth_table, 0b10);
  auto it = std::find_if(cuts[3].begin(), cuts[3].end(), [](const Cut& c) { return c.leaves == std::vector<NodeId>{1, 2}; });
  ASSERT_NE(it, cuts[3].end());
  EXPECT_EQ(it->truth_table, 0b1000);
}

TEST(Cuts, XorFromThreeAnds) {
  AigBuilder b;
  Literal x = b.input("x"), y = b.input("y");
  Literal r = b.xor_(x, y);
  b.output(r, "r");
  Aig aig = b.take();
  auto cuts = enumerate_cuts(aig);
  std::vector<NodeId> leaves{x.node, y.node};
  auto it = std::find_if(cuts[r.node].begin(), cuts[r.node].end(), [&](const Cut& c) { return c.leaves == leaves; });
  ASSERT_NE(it, cuts[r.node].end());
  std::uint8_t tt = r.negated ? static_cast<std::uint8_t>(~it->truth_table & 0xf) : it->truth_table;
  EXPECT_EQ(tt, 0b0110);
}

TEST(Cuts, TablesMatchSimulation) {
  Aig aig = build_multiplier({4, FsaKind::CarryLookahead}).aig;
  auto cuts = enumerate_cuts(aig);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 64; ++trial) {
    std::vector<std::uint8_t> in(aig.num_inputs());
    for (auto& v : in) v = rng() & 1;
    auto vals = aig.simulate(in);
    for (const Gate& g : aig.gates()) {
      EXPECT_LE(cuts[g.id].size(), 16u);
      for (const Cut& c : cuts[g.id]) {
        unsigned row = 0;
        for (std::size_t i = 0; i < c.leaves.size(); ++i) row |= unsigned(vals[c.leaves[i]]) << i;
        EXPECT_EQ((c.truth_table >> row) & 1, vals[g.id]);
      }
    }
  }
}

namespace {

void expect_sound(const Aig& aig, const AdderInstance& a) {
  unsigned k = static_cast<unsigned>(a.inputs.size());
  // Drive the circuit only through leaves: simulate by exhaustive inputs and
  // check on every circuit assignment (leaves are functions of inputs).
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << aig.num_inputs()); ++x) {
    std::vector<std::uint8_t> in(aig.num_inputs());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = (x >> i) & 1;
    auto v = aig.simulate(in);
    int sum = 0;
    for (unsigned i = 0; i < k; ++i) sum += Aig::literal_value(v, a.inputs[i]);
    int rhs = 2 * Aig::literal_value(v, a.carry) + Aig::literal_value(v, a.sum);
    ASSERT_EQ(rhs, sum);
  }
}

}  // namespace

TEST(Adders, HalfAdder) {
  AigBuilder b;
  Literal x = b.input("x"), y = b.input("y");
  auto [s, c] = b.half_adder(x, y);
  b.output(s, "s");
  b.output(c, "c");
  Aig aig = b.take();
  auto adders = detect_adders(aig, enumerate_cuts(aig));
  ASSERT_EQ(adders.size(), 1u);
  EXPECT_EQ(adders[0].kind, AdderInstance::Kind::HA);
  expect_sound(aig, adders[0]);
}

TEST(Adders, RippleCarryAdder) {
  Aig aig = build_adder(4);
  auto adders = detect_adders(aig, enumerate_cuts(aig));
  int ha = 0, fa = 0;
  for (const auto& a : adders) {
    (a.kind == AdderInstance::Kind::HA ? ha : fa)++;
    expect_sound(aig, a);
  }
  EXPECT_EQ(ha, 1);
  EXPECT_EQ(fa, 3);
}

TEST(Adders, AndChainHasNone) {
  AigBuilder b;
  Literal acc = b.input("x0");
  for (int i = 1; i < 5; ++i) acc = b.and_(acc, b.input("x" + std::to_string(i)));
  b.output(acc, "o");
  Aig aig = b.take();
  EXPECT_TRUE(detect_adders(aig, enumerate_cuts(aig)).empty());
}

TEST(Adders, MultiplierInstancesAreSound) {
  for (FsaKind k : {FsaKind::RippleCarry, FsaKind::CarryLookahead}) {
    Aig aig = build_multiplier({4, k}).aig;
    auto adders = detect_adders(aig, enumerate_cuts(aig));
    EXPECT_FALSE(adders.empty());
    for (const auto& a : adders) expect_sound(aig, a);
  }
}

TEST(Fsa, RippleCarryMultiplier) {
  GeneratedCircuit g = build_multiplier({4, FsaKind::RippleCarry});
  auto fsa = approximate_fsa(g.aig, detect_adders(g.aig, enumerate_cuts(g.aig)));
  EXPECT_FALSE(fsa.whole_circuit);
  EXPECT_TRUE(is_valid_subcircuit(g.aig, fsa.region));
  for (NodeId id : g.fsa_gates) EXPECT_TRUE(fsa.region.contains(id)) << id;
  for (NodeId id : g.pp_gates) EXPECT_FALSE(fsa.region.contains(id)) << id;
  EXPECT_EQ(fsa.bypassing_outputs, std::vector<std::size_t>{0});
}

TEST(Fsa, HalfAdderOutputs) {
  AigBuilder b;
  Literal x = b.input("x"), y = b.input("y");
  auto [s, c] = b.half_adder(x, y);
  b.output(s, "s");
  b.output(c, "c");
  Aig aig = b.take();
  auto fsa = approximate_fsa(aig, detect_adders(aig, enumerate_cuts(aig)));
  EXPECT_TRUE(fsa.bypassing_outputs.empty());
  std::set<NodeId> roots(fsa.region.roots.begin(), fsa.region.roots.end());
  EXPECT_TRUE(roots.count(s.node) && roots.count(c.node));
  EXPECT_TRUE(is_valid_subcircuit(aig, fsa.region));
}

TEST(Fsa, NoAddersGivesWholeCircuit) {
  Aig aig = parse_aiger(kTwoBitMultiplier);
  auto fsa = approximate_fsa(aig, {});
  EXPECT_TRUE(fsa.whole_circuit);
  EXPECT_EQ(fsa.region.nodes.size(), aig.num_gates());
}

TEST(Extract, TwoBitMultiplierDepths) {
  Aig aig = parse_aiger(kTwoBitMultiplier);
  Subcircuit d1 = extract_subcircuit(aig, 14, 1);
  EXPECT_TRUE(d1.contains(14));
  EXPECT_TRUE(std::count(d1.boundary_inputs.begin(), d1.boundary_inputs.end(), 13u));
  EXPECT_TRUE(std::count(d1.boundary_inputs.begin(), d1.boundary_inputs.end(), 12u));
  Subcircuit d2 = extract_subcircuit(aig, 14, 2);
  EXPECT_EQ(d2.nodes, (std::vector<NodeId>{12, 13, 14}));
  EXPECT_EQ(d2.boundary_inputs, (std::vector<NodeId>{8, 11}));
  Subcircuit full = extract_subcircuit(aig, 14, 50);
  for (NodeId id : full.boundary_inputs) EXPECT_TRUE(aig.is_input(id));
  EXPECT_THROW(extract_subcircuit(aig, 1, 2), AigError);
  for (const Gate& g : aig.gates())
    for (unsigned d = 1; d < 5; ++d) EXPECT_TRUE(is_valid_subcircuit(aig, extract_subcircuit(aig, g.id, d)));
}

TEST(Extract, ClosurePullsInGates) {
  Aig aig = parse_aiger(kTwoBitMultiplier);
  // g16 = g14 & g12 with both children present must join.
  Subcircuit sc = close_subcircuit(aig, {6, 7});
  EXPECT_TRUE(sc.contains(8));
  EXPECT_TRUE(is_valid_subcircuit(aig, sc));
}

TEST(Benchgen, SmallMultipliers) {
  Aig one = build_multiplier({1}).aig;
  EXPECT_EQ(one.num_gates(), 1u);
  EXPECT_EQ(one.num_outputs(), 2u);
  for (unsigned n = 1; n <= 6; ++n) {
    for (FsaKind k : {FsaKind::RippleCarry, FsaKind::CarryLookahead}) {
      for (bool s : {false, true}) {
        GenSpec spec{n, k, s};
        Aig aig = build_multiplier(spec).aig;
        EXPECT_TRUE(multiplies(aig, n, s)) << n << " " << int(k) << " " << s;
        EXPECT_EQ(aig.input_name(0), "a0");
        EXPECT_EQ(aig.output_name(2 * n - 1), "s" + std::to_string(2 * n - 1));
      }
    }
  }
}

TEST(Benchgen, AndChainKeepsFunction) {
  for (unsigned n : {4u, 6u}) {
    GenSpec spec{n, FsaKind::RippleCarry};
    spec.and_chain = 5;
    GeneratedCircuit g = build_multiplier(spec);
    EXPECT_TRUE(multiplies(g.aig, n, false));
    EXPECT_EQ(g.chain_gates.size(), 5u);
  }
}

TEST(Benchgen, Deterministic) {
  GenSpec spec{5, FsaKind::CarryLookahead, true};
  EXPECT_EQ(gen_multiplier(spec), gen_multiplier(spec));
  spec.fault = Fault{FaultKind::SwapChildren, 3};
  EXPECT_EQ(gen_multiplier(spec), gen_multiplier(spec));
}

TEST(Benchgen, FaultsAreObservable) {
  Aig base = parse_aiger(kTwoBitMultiplier);
  for (FaultKind k : {FaultKind::FlipPolarity, FaultKind::SwapChildren, FaultKind::ConstantGate}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Aig bad = inject_fault(base, {k, seed});
      EXPECT_FALSE(outputs_equivalent(base, bad));
      EXPECT_FALSE(multiplies(bad, 2, false));
      int changed = 0;
      for (const Gate& g : base.gates()) {
        const Gate& h = bad.gate(g.id);
        changed += !(g.left == h.left && g.right == h.right);
      }
      EXPECT_EQ(changed, k == FaultKind::SwapChildren ? 2 : 1);
    }
  }
  Aig m = build_multiplier({4}).aig;
  EXPECT_TRUE(outputs_equivalent(m, m));
}

TEST(Benchgen, FaultNames) {
  EXPECT_EQ(parse_fault_kind("flip-polarity"), FaultKind::FlipPolarity);
  EXPECT_EQ(fault_kind_name(FaultKind::ConstantGate), "constant-gate");
  EXPECT_THROW(parse_fault_kind("melt"), std::invalid_argument);
}

TEST(Simulation, WordsMatchScalar) {
  Aig aig = build_multiplier({3, FsaKind::CarryLookahead}).aig;
  std::mt19937_64 rng(9);
  std::vector<std::uint64_t> words(aig.num_inputs());
  for (auto& w : words) w = rng();
  auto wv = aig.simulate_words(words);
  for (unsigned bit = 0; bit < 64; ++bit) {
    std::vector<std::uint8_t> in(aig.num_inputs());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = (words[i] >> bit) & 1;
    auto v = aig.simulate(in);
    for (NodeId id = 0; id < aig.num_nodes(); ++id) ASSERT_EQ(v[id], (wv[id] >> bit) & 1);
  }
}

