#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mmverify/benchgen.hpp"
#include "mmverify/sampler.hpp"

using namespace mmv;
using mmv::testing::and_cone;
using mmv::testing::full_adder;

namespace {

Subcircuit whole(const Aig& aig) {
  std::vector<NodeId> gates;
  for (const Gate& g : aig.gates()) gates.push_back(g.id);
  return close_subcircuit(aig, gates);
}

bool all_ones(const SampleSpace& space, const Sample& s) {
  for (std::size_t c = 0; c < space.num_boundary(); ++c)
    if (!s.values[c]) return false;
  return true;
}

}  // namespace

TEST(Sampler, SingleAndUniform) {
  Aig aig;
  NodeId a = aig.add_input("a"), b = aig.add_input("b");
  Literal g = aig.add_gate({a, false}, {b, false});
  aig.add_output(g);
  SampleSpace space(aig, whole(aig));
  auto samples = sample_models(space, 4, 11, SamplerKind::Uniform);
  ASSERT_EQ(samples.size(), 4u);
  for (const Sample& s : samples) {
    EXPECT_TRUE(is_model(space, s));
    EXPECT_EQ(s.values[*space.column(g.node)], s.values[*space.column(a)] & s.values[*space.column(b)]);
  }
}

TEST(Sampler, DeepChainWeightedReachesOne) {
  Aig aig = and_cone(9);
  SampleSpace space(aig, whole(aig));
  NodeId out = aig.outputs()[0].node;
  auto samples = sample_models(space, 64, 5, SamplerKind::Weighted);
  int ones = 0;
  for (const Sample& s : samples) ones += s.values[*space.column(out)];
  EXPECT_GE(ones, 1);
}

TEST(Sampler, DefaultCount) {
  Subcircuit sc;
  for (NodeId i = 1; i <= 100; ++i) sc.nodes.push_back(i);
  EXPECT_EQ(default_sample_count(sc), 300u);
  EXPECT_EQ(default_sample_count(sc, 5), 500u);
}

TEST(Sampler, EverySampleIsAModel) {
  for (bool cl : {false, true}) {
    GenSpec gs;
    gs.n_bits = 4;
    gs.fsa = cl ? FsaKind::CarryLookahead : FsaKind::RippleCarry;
    Aig aig = build_multiplier(gs).aig;
    for (NodeId root : {aig.outputs()[5].node, aig.outputs()[7].node}) {
      if (!aig.is_gate(root)) continue;
      for (unsigned depth : {2u, 4u, 8u}) {
        SampleSpace space(aig, extract_subcircuit(aig, root, depth));
        for (auto kind : {SamplerKind::Weighted, SamplerKind::Uniform})
          for (const Sample& s : sample_models(space, 200, depth, kind)) ASSERT_TRUE(is_model(space, s));
      }
    }
  }
}

TEST(Sampler, DeterministicAcrossThreads) {
  GenSpec gs;
  gs.n_bits = 6;
  Aig aig = build_multiplier(gs).aig;
  SampleSpace space(aig, extract_subcircuit(aig, aig.outputs()[8].node, 6));
  for (auto kind : {SamplerKind::Weighted, SamplerKind::Uniform}) {
    auto one = sample_models(space, 97, 3, kind, 1);
    EXPECT_EQ(one, sample_models(space, 97, 3, kind, 1));
    EXPECT_EQ(one, sample_models(space, 97, 3, kind, 4));
    EXPECT_NE(one, sample_models(space, 97, 4, kind, 1));
  }
}

TEST(Sampler, WeightedCoversAllOnesInput) {
  for (unsigned n = 2; n <= 12; ++n) {
    Aig aig = and_cone(n);
    SampleSpace space(aig, whole(aig));
    const std::size_t count = 3 * n + 24;
    std::size_t runs = 0, hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::size_t here = 0;
      for (const Sample& s : sample_models(space, count, seed, SamplerKind::Weighted)) here += all_ones(space, s);
      runs += here > 0;
      hits += here;
    }
    EXPECT_GE(runs / 100.0, 1.0 / (n + 1)) << "n=" << n;
    // per sample, n=2 sits exactly at 1/3 in expectation
    if (n >= 4) EXPECT_GE(static_cast<double>(hits) / static_cast<double>(100 * count), 1.0 / (n + 1)) << "n=" << n;
  }
}

TEST(Sampler, UniformRarelyReachesDeepChain) {
  Aig aig = and_cone(12);
  SampleSpace space(aig, whole(aig));
  std::size_t hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (const Sample& s : sample_models(space, 60, seed, SamplerKind::Uniform)) hits += all_ones(space, s);
  EXPECT_LE(hits, 3u);
}

TEST(Sampler, AttachedProducts) {
  auto fa = full_adder();
  std::vector<AttachedVar> attached{{100, {fa.x.node, fa.y.node}}, {101, {fa.x.node, fa.y.node, fa.z.node}}};
  SampleSpace space(fa.aig, fa.sc, attached);
  ASSERT_EQ(space.columns(), fa.sc.size() + 2);
  for (auto kind : {SamplerKind::Weighted, SamplerKind::Uniform}) {
    for (const Sample& s : sample_models(space, 50, 9, kind)) {
      int x = s.values[*space.column(fa.x.node)], y = s.values[*space.column(fa.y.node)];
      int z = s.values[*space.column(fa.z.node)];
      EXPECT_EQ(s.values[space.first_attached_column()], x * y);
      EXPECT_EQ(s.values[space.first_attached_column() + 1], x * y * z);
    }
  }
}

TEST(Sampler, AttachedFactorOutsideSpace) {
  auto fa = full_adder();
  Subcircuit part = extract_subcircuit(fa.aig, fa.aig.gates()[0].id, 1);
  EXPECT_THROW(SampleSpace(fa.aig, part, {{100, {fa.s.node}}}), AigError);
}

TEST(Sampler, CompleteSampleSimulates) {
  auto fa = full_adder();
  SampleSpace space(fa.aig, fa.sc);
  for (unsigned bits = 0; bits < 8; ++bits) {
    std::vector<std::uint8_t> boundary(3);
    for (unsigned i = 0; i < 3; ++i) boundary[i] = (bits >> i) & 1u;
    Sample s = complete_sample(space, boundary);
    EXPECT_TRUE(is_model(space, s));
    int x = s.values[*space.column(fa.x.node)], y = s.values[*space.column(fa.y.node)];
    int z = s.values[*space.column(fa.z.node)];
    int sum = mmv::testing::literal_bit(space, s, fa.s), carry = mmv::testing::literal_bit(space, s, fa.c);
    EXPECT_EQ(2 * carry + sum, x + y + z);
  }
}

TEST(Sampler, SeedMixing) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}
