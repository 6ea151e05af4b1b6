#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "mmverify/benchgen.hpp"
#include "mmverify/orchestrator.hpp"

using namespace mmv;
using mmv::testing::kTwoBitMultiplier;

namespace {

Aig multiplier(unsigned n, bool cl, bool is_signed = false) {
  GenSpec gs;
  gs.n_bits = n;
  gs.fsa = cl ? FsaKind::CarryLookahead : FsaKind::RippleCarry;
  gs.is_signed = is_signed;
  return build_multiplier(gs).aig;
}

Config config_for(Aig aig, Engine engine = Engine::Hybrid) {
  Config c;
  c.aig = std::move(aig);
  c.engine = engine;
  return c;
}

bool product_mismatch(const Aig& aig, const std::vector<std::uint8_t>& w, unsigned n) {
  auto nodes = aig.simulate(w);
  std::uint64_t a = 0, b = 0, s = 0;
  for (unsigned i = 0; i < n; ++i) {
    a |= std::uint64_t{w[i]} << i;
    b |= std::uint64_t{w[n + i]} << i;
  }
  for (std::size_t o = 0; o < aig.num_outputs(); ++o)
    s |= std::uint64_t{Aig::literal_value(nodes, aig.outputs()[o])} << o;
  return s != a * b;
}

}  // namespace

TEST(Verify, FourBitCorrect) {
  Verdict v = verify(config_for(multiplier(4, false)));
  EXPECT_EQ(v.status, Status::Correct) << v.message;
  EXPECT_EQ(exit_code(v.status), 0);
  EXPECT_FALSE(v.witness);
  EXPECT_EQ(v.threads, v.primes.size());
}

TEST(Verify, FlippedPolarityIncorrect) {
  Aig bad = inject_fault(multiplier(4, false), Fault{FaultKind::FlipPolarity, 1});
  for (Engine e : {Engine::Hybrid, Engine::Nonlinear}) {
    Verdict v = verify(config_for(bad, e));
    ASSERT_EQ(v.status, Status::Incorrect) << v.message;
    EXPECT_EQ(exit_code(v.status), 1);
    ASSERT_TRUE(v.witness);
    EXPECT_TRUE(product_mismatch(bad, *v.witness, 4));
  }
}

TEST(Verify, ArityError) {
  Aig aig;
  NodeId a = aig.add_input("a"), b = aig.add_input("b"), c = aig.add_input("c");
  Literal g = aig.add_gate({a, false}, {b, false});
  aig.add_output(aig.add_gate(g, {c, false}));
  Verdict v = verify(config_for(aig));
  EXPECT_EQ(v.status, Status::Error);
  EXPECT_EQ(exit_code(v.status), 2);
  EXPECT_FALSE(v.message.empty());
}

TEST(Verify, MissingFile) {
  Config c;
  c.input_path = "/nonexistent/circuit.aag";
  Verdict v = verify(c);
  EXPECT_EQ(v.status, Status::Error);
  auto j = report_json(v, c);
  EXPECT_EQ(j["status"], "error");
  EXPECT_EQ(j["phases"]["preprocess"], "-");
  EXPECT_EQ(j["phases"]["nonlinear_rewrite"], "-");
  EXPECT_FALSE(j["message"].get<std::string>().empty());
}

TEST(Verify, ReadsAigerFile) {
  auto path = std::filesystem::temp_directory_path() / "mmv_fig1.aag";
  std::ofstream(path) << kTwoBitMultiplier;
  Config c;
  c.input_path = path.string();
  Verdict v = verify(c);
  EXPECT_EQ(v.status, Status::Correct) << v.message;
  std::filesystem::remove(path);
}

TEST(Report, LinearSuccessSkipsNonlinear) {
  Config c = config_for(multiplier(4, false));
  Verdict v = verify(c);
  ASSERT_EQ(v.status, Status::Correct);
  auto j = report_json(v, c);
  EXPECT_EQ(j["phases"]["simplify"], "-");
  EXPECT_EQ(j["phases"]["nonlinear_rewrite"], "-");
  EXPECT_TRUE(j["phases"]["linear_rewrite"].is_number());
  EXPECT_TRUE(j["phases"]["encode"].is_number());
  EXPECT_EQ(j["switched"], false);
  EXPECT_EQ(j["witness"], nullptr);
  EXPECT_EQ(j["exit_code"], 0);
  EXPECT_NE(report_table(v).find("nonlinear rewrite"), std::string::npos);
}

TEST(Report, NoRepairWhenGuessesHold) {
  Config c = config_for(multiplier(4, false));
  Verdict v = verify(c);
  ASSERT_EQ(v.status, Status::Correct);
  ASSERT_EQ(v.stats.repair_rounds, 0u);
  auto j = report_json(v, c);
  EXPECT_EQ(j["phases"]["repair"], "-");
  EXPECT_EQ(j["per_prime"]["repair"], "-");
  EXPECT_EQ(j["counters"]["repair_rounds"], 0);
}

TEST(Report, NonlinearOnlySkipsLinear) {
  Config c = config_for(multiplier(3, true), Engine::Nonlinear);
  Verdict v = verify(c);
  ASSERT_EQ(v.status, Status::Correct);
  auto j = report_json(v, c);
  EXPECT_EQ(j["phases"]["preprocess"], "-");
  EXPECT_EQ(j["phases"]["guess"], "-");
  EXPECT_TRUE(j["phases"]["nonlinear_rewrite"].is_number());
  EXPECT_EQ(j["engine"], "nonlinear");
}

TEST(Report, WitnessByName) {
  Aig bad = inject_fault(multiplier(2, false), Fault{FaultKind::ConstantGate, 2});
  Config c = config_for(bad);
  Verdict v = verify(c);
  ASSERT_EQ(v.status, Status::Incorrect);
  auto j = report_json(v, c);
  ASSERT_TRUE(j["witness"].is_object());
  EXPECT_EQ(j["witness"].size(), 4u);
  EXPECT_TRUE(j["witness"].contains("a0"));
  EXPECT_EQ(j["witness"]["b1"], (*v.witness)[3]);
}

TEST(Verify, EnginesAgreeOnSmallCorpus) {
  for (unsigned n : {2u, 3u, 4u, 5u, 6u})
    for (bool cl : {false, true}) {
      Aig good = multiplier(n, cl);
      Aig bad = inject_fault(good, Fault{FaultKind::SwapChildren, n});
      for (Engine e : {Engine::Hybrid, Engine::Nonlinear}) {
        Verdict vg = verify(config_for(good, e));
        EXPECT_EQ(vg.status, Status::Correct) << n << cl << engine_name(e) << vg.message;
        Verdict vb = verify(config_for(bad, e));
        ASSERT_EQ(vb.status, Status::Incorrect) << n << cl << engine_name(e) << vb.message;
        EXPECT_TRUE(product_mismatch(bad, *vb.witness, n));
      }
      Verdict lin = verify(config_for(good, Engine::Linear));
      if (lin.status != Status::Error) EXPECT_EQ(lin.status, Status::Correct);
    }
}

TEST(Verify, ThreadCountIndependent) {
  for (bool faulty : {false, true}) {
    Aig aig = multiplier(6, true);
    if (faulty) aig = inject_fault(aig, Fault{FaultKind::FlipPolarity, 4});
    Config one = config_for(aig), many = config_for(aig);
    one.threads = 1;
    many.threads = 4;
    Verdict a = verify(one), b = verify(many);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.witness, b.witness);
    EXPECT_EQ(a.cached_relations, b.cached_relations);
    EXPECT_EQ(a.stats.guess_rounds, b.stats.guess_rounds);
  }
}

TEST(Verify, ParseEngine) {
  EXPECT_EQ(parse_engine("hybrid"), Engine::Hybrid);
  EXPECT_EQ(parse_engine("linear-only"), Engine::Linear);
  EXPECT_EQ(parse_engine("nonlinear"), Engine::Nonlinear);
  EXPECT_THROW(parse_engine("fast"), std::invalid_argument);
}
