#include <gtest/gtest.h>

#include <map>
#include <random>

#include "mmverify/algebra.hpp"
#include "mmverify/poly_text.hpp"

using namespace mmv;

namespace {

PrimeBasis small_basis() { return PrimeBasis({7, 11, 13}); }

CoeffVec cv(std::initializer_list<Residue> r) { return CoeffVec(std::vector<Residue>(r)); }

// Exact-integer polynomial keyed by sorted (var, exp) lists.
using ExactPoly = std::map<std::vector<std::pair<Var, std::uint32_t>>, BigInt>;

ExactPoly exact_of(const std::vector<std::pair<Monomial, BigInt>>& terms) {
  ExactPoly out;
  for (const auto& [m, c] : terms) {
    std::vector<std::pair<Var, std::uint32_t>> key;
    for (const Factor& f : m.factors()) key.emplace_back(f.var, f.exp);
    out[key] += c;
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
  return out;
}

ExactPoly exact_mul(const ExactPoly& a, const ExactPoly& b) {
  std::vector<std::pair<Monomial, BigInt>> terms;
  for (const auto& [ka, ca] : a) {
    for (const auto& [kb, cb] : b) {
      std::vector<Factor> f;
      for (auto [v, e] : ka) f.push_back({v, e});
      for (auto [v, e] : kb) f.push_back({v, e});
      terms.emplace_back(Monomial(f), ca * cb);
    }
  }
  return exact_of(terms);
}

ExactPoly exact_add(ExactPoly a, const ExactPoly& b) {
  for (const auto& [k, c] : b) a[k] += c;
  std::erase_if(a, [](const auto& kv) { return kv.second == 0; });
  return a;
}

ExactPoly reconstruct(const MmPoly& f) {
  std::vector<std::pair<Monomial, BigInt>> terms;
  for (std::size_t t = 0; t < f.size(); ++t) terms.emplace_back(f.monomial(t), crt_reconstruct(f.coeff_vec(t), f.basis()));
  return exact_of(terms);
}

MmPoly mm_of(const RingPtr& ring, const ExactPoly& e) {
  std::vector<std::pair<Monomial, CoeffVec>> terms;
  for (const auto& [k, c] : e) {
    std::vector<Factor> f;
    for (auto [v, x] : k) f.push_back({v, x});
    terms.emplace_back(Monomial(f), mm_reduce_scalar(c, ring->basis));
  }
  return MmPoly::from_terms(ring, std::move(terms));
}

ExactPoly random_exact(std::mt19937_64& rng, int terms, int vars, int bound) {
  std::vector<std::pair<Monomial, BigInt>> out;
  std::uniform_int_distribution<int> nv(0, 3), var(1, vars), ex(1, 2), co(-bound, bound);
  for (int t = 0; t < terms; ++t) {
    std::vector<Factor> f;
    int k = nv(rng);
    for (int i = 0; i < k; ++i) f.push_back({static_cast<Var>(var(rng)), static_cast<std::uint32_t>(ex(rng))});
    out.emplace_back(Monomial(f), BigInt(co(rng)));
  }
  return exact_of(out);
}

}  // namespace

TEST(Scalar, ReduceNegativeFive) {
  EXPECT_EQ(mm_reduce_scalar(-5, small_basis()), cv({2, 6, 8}));
  EXPECT_EQ(mm_reduce_scalar(0, small_basis()), cv({0, 0, 0}));
}

TEST(Scalar, InverseOfThree) {
  EXPECT_EQ(mm_inv(cv({3, 3, 3}), small_basis()), cv({5, 4, 9}));
  EXPECT_EQ(mm_inv(cv({1, 1, 1}), small_basis()), cv({1, 1, 1}));
}

TEST(Scalar, ZeroLaneIsNotInvertible) {
  try {
    mm_inv(cv({0, 3, 3}), small_basis());
    FAIL();
  } catch (const NonInvertible& e) {
    EXPECT_EQ(e.lane(), 0u);
  }
}

TEST(Scalar, LargePowerAgainstExactOracle) {
  PrimeBasis basis = PrimeBasis::for_bound(BigInt(1) << 128, 16);
  ASSERT_EQ(basis.size(), 8u);
  BigInt x = BigInt(1) << 127;
  CoeffVec r = mm_reduce_scalar(x, basis);
  for (std::size_t i = 0; i < basis.size(); ++i) EXPECT_EQ(BigInt(r[i]), x % basis[i]);
}

TEST(Scalar, CrtRoundTrip) {
  EXPECT_EQ(crt_reconstruct(cv({2, 6, 8}), small_basis()), -5);
  EXPECT_EQ(crt_reconstruct(cv({0, 0, 0}), small_basis()), 0);
  PrimeBasis basis = PrimeBasis::for_bound(BigInt(1) << 90, 16);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    BigInt x = (BigInt(rng()) << 64 | rng()) % (basis.product() / 2);
    if (rng() & 1) x = -x;
    EXPECT_EQ(crt_reconstruct(mm_reduce_scalar(x, basis), basis), x);
  }
}

TEST(Scalar, SymmetricRange) {
  EXPECT_EQ(symmetric(0, 7), 0);
  EXPECT_EQ(symmetric(3, 7), 3);
  EXPECT_EQ(symmetric(4, 7), -3);
  EXPECT_EQ(symmetric(6, 7), -1);
}

TEST(Basis, PrimeCounts) {
  EXPECT_EQ(PrimeBasis::for_bound(BigInt(1) << 128, 16).size(), 8u);
  EXPECT_EQ(PrimeBasis::for_bound(BigInt(1) << 256, 16).size(), 16u);
  EXPECT_EQ(PrimeBasis::for_bound(BigInt(1) << 4, 16).size(), 1u);
  PrimeBasis b = PrimeBasis::for_bound(BigInt(1) << 128, 16);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_TRUE(is_prime(b[i]));
    EXPECT_GT(b[i], 1u << 16);
    EXPECT_LT(b[i], 1u << 17);
  }
  EXPECT_GT(b.product(), BigInt(1) << 128);
}

TEST(Basis, RejectsDuplicatesAndSmallProducts) {
  EXPECT_THROW(PrimeBasis({7, 7}), AlgebraError);
  EXPECT_THROW(PrimeBasis({7, 11}, 77), AlgebraError);
  EXPECT_NO_THROW(PrimeBasis({7, 11}, 76));
}

TEST(Monomial, NormalForm) {
  Monomial m({{3, 1}, {1, 2}, {3, 2}, {2, 0}});
  ASSERT_EQ(m.factors().size(), 2u);
  EXPECT_EQ(m.factors()[0], (Factor{1, 2}));
  EXPECT_EQ(m.factors()[1], (Factor{3, 3}));
  EXPECT_EQ(m.degree(), 5u);
  EXPECT_TRUE(Monomial().is_one());
  EXPECT_EQ(m.boolean_reduced(), Monomial({{1, 1}, {3, 1}}));
  EXPECT_TRUE(Monomial({{1, 1}}).divides(m));
  EXPECT_EQ(m.quotient(Monomial({{3, 2}})), Monomial({{1, 2}, {3, 1}}));
}

TEST(MonomialOrder, AxiomsOnRandomTriples) {
  std::mt19937_64 rng(11);
  std::vector<std::uint32_t> rank{0, 5, 2, 7, 1, 3, 6, 4};
  for (auto kind : {MonomialOrder::Kind::Lex, MonomialOrder::Kind::DegLex}) {
    for (const MonomialOrder& ord : {MonomialOrder(kind), MonomialOrder(kind, rank)}) {
      auto rnd = [&] {
        std::vector<Factor> f;
        for (Var v = 1; v < 8; ++v)
          if (rng() % 3 == 0) f.push_back({v, static_cast<std::uint32_t>(1 + rng() % 2)});
        return Monomial(f);
      };
      for (int i = 0; i < 500; ++i) {
        Monomial a = rnd(), b = rnd(), c = rnd();
        auto ab = ord.compare(a, b);
        EXPECT_EQ(ab == 0, a == b);
        EXPECT_TRUE(ord.compare(b, a) == (0 <=> ab));
        if (ab < 0) EXPECT_TRUE(ord.compare(a * c, b * c) < 0);
        if (ab < 0 && ord.compare(b, c) < 0) EXPECT_TRUE(ord.compare(a, c) < 0);
        if (!a.is_one()) EXPECT_TRUE(ord.compare(Monomial(), a) < 0);
      }
    }
  }
}

TEST(MonomialOrder, DegLexPrefersDegree) {
  MonomialOrder ord(MonomialOrder::Kind::DegLex);
  EXPECT_TRUE(ord.compare(Monomial::variable(9), Monomial({{1, 1}, {2, 1}})) < 0);
  MonomialOrder lex;
  EXPECT_TRUE(lex.compare(Monomial::variable(9), Monomial({{1, 1}, {2, 1}})) > 0);
}

TEST(MmPoly, AddNegationIsZero) {
  auto ring = make_ring(small_basis());
  MmPoly f = MmPoly::from_terms(ring, {{Monomial::variable(1), cv({3, 4, 5})}, {Monomial(), cv({1, 1, 1})}});
  EXPECT_TRUE(mm_add(f, mm_scale(f, cv({6, 10, 12}))).is_zero());
  EXPECT_TRUE(mm_sub(f, f).is_zero());
}

TEST(MmPoly, BinomialSquare) {
  auto ring = make_ring(small_basis());
  MmPoly xy = mm_add(MmPoly::variable(ring, 2), MmPoly::variable(ring, 1));
  MmPoly sq = mm_mul(xy, xy, false);
  ASSERT_EQ(sq.size(), 3u);
  EXPECT_EQ(sq.coeff_of(Monomial::variable(2, 2)), cv({1, 1, 1}));
  EXPECT_EQ(sq.coeff_of(Monomial({{1, 1}, {2, 1}})), cv({2, 2, 2}));
  EXPECT_EQ(sq.coeff_of(Monomial::variable(1, 2)), cv({1, 1, 1}));
  MmPoly red = mm_mul(xy, xy, true);
  EXPECT_EQ(red.coeff_of(Monomial::variable(2)), cv({1, 1, 1}));
  EXPECT_EQ(red.size(), 3u);
}

TEST(MmPoly, TermsAreDescending) {
  auto ring = make_ring(small_basis());
  MmPoly f = MmPoly::from_terms(ring, {{Monomial(), cv({1, 1, 1})},
                                       {Monomial::variable(1), cv({1, 1, 1})},
                                       {Monomial::variable(3), cv({1, 1, 1})},
                                       {Monomial::variable(1), cv({6, 10, 12})}});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.monomial(0), Monomial::variable(3));
  EXPECT_TRUE(f.monomial(1).is_one());
}

// Variables for the reduction example: a = 1, b = 2, x = 3.
TEST(Reduce, ExampleTwoScaledRelation) {
  auto ring = make_ring(small_basis());
  MmPoly fp = MmPoly::from_terms(ring, {{Monomial::variable(3), cv({1, 1, 1})},
                                        {Monomial::variable(2), cv({5, 4, 9})},
                                        {Monomial::variable(1), cv({2, 7, 4})}});
  MmPoly scaled = mm_scale(fp, cv({2, 6, 8}));
  EXPECT_EQ(scaled.coeff_of(Monomial::variable(3)), cv({2, 6, 8}));
  EXPECT_EQ(scaled.coeff_of(Monomial::variable(2)), cv({3, 2, 7}));
  EXPECT_EQ(scaled.coeff_of(Monomial::variable(1)), cv({4, 9, 6}));
}

TEST(Reduce, ExampleTwo) {
  auto ring = make_ring(small_basis());
  const PrimeBasis& B = ring->basis;
  MmPoly spec = MmPoly::from_terms(ring, {{Monomial::variable(3), mm_reduce_scalar(-5, B)},
                                          {Monomial::variable(2), mm_reduce_scalar(4, B)},
                                          {Monomial::variable(1), mm_reduce_scalar(3, B)}});
  MmPoly rel = MmPoly::from_terms(ring, {{Monomial::variable(3), mm_reduce_scalar(3, B)},
                                         {Monomial::variable(2), mm_reduce_scalar(1, B)},
                                         {Monomial::variable(1), mm_reduce_scalar(-1, B)}});
  EXPECT_EQ(leading_term(rel).monomial, Monomial::variable(3));
  EXPECT_EQ(mm_inv(leading_term(rel).coeff, B), cv({5, 4, 9}));
  MmPoly r = reduce_step(spec, rel);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.coeff_of(Monomial::variable(2)), cv({1, 2, 10}));
  EXPECT_EQ(r.coeff_of(Monomial::variable(1)), cv({6, 5, 10}));
  EXPECT_TRUE(reduce_step(rel, rel).is_zero());
}

TEST(Reduce, NonlinearMultiplier) {
  // s = 4, g = 3, x = 2, y = 1
  auto ring = make_ring(small_basis());
  MmPoly one = MmPoly::constant(ring, cv({1, 1, 1}));
  MmPoly spec = mm_add(mm_mul(MmPoly::variable(ring, 4), MmPoly::variable(ring, 3)), one);
  MmPoly rel = mm_sub(MmPoly::variable(ring, 3), mm_mul(MmPoly::variable(ring, 2), MmPoly::variable(ring, 1)));
  MmPoly r = reduce_step(spec, rel);
  MmPoly expect = mm_add(MmPoly::from_terms(ring, {{Monomial({{1, 1}, {2, 1}, {4, 1}}), cv({1, 1, 1})}}), one);
  EXPECT_EQ(r, expect);
  EXPECT_THROW(reduce_step(one, rel), AlgebraError);
}

TEST(LeadingTerm, Cases) {
  auto ring = make_ring(small_basis());
  EXPECT_TRUE(leading_term(MmPoly::constant(ring, cv({3, 3, 3}))).monomial.is_one());
  EXPECT_THROW(leading_term(MmPoly(ring)), AlgebraError);
  auto dl = make_ring(small_basis(), MonomialOrder(MonomialOrder::Kind::DegLex));
  MmPoly f = mm_add(mm_mul(MmPoly::variable(dl, 1), MmPoly::variable(dl, 2)), MmPoly::variable(dl, 9));
  EXPECT_EQ(leading_term(f).monomial, Monomial({{1, 1}, {2, 1}}));
}

TEST(MmPoly, BasisMismatch) {
  auto r1 = make_ring(small_basis());
  auto r2 = make_ring(PrimeBasis({5, 17}));
  EXPECT_THROW(mm_add(MmPoly::variable(r1, 1), MmPoly::variable(r2, 1)), AlgebraError);
}

TEST(MmPoly, ExactIntegerConsistency) {
  auto ring = make_ring(PrimeBasis::for_bound(BigInt(1) << 80, 16));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    ExactPoly a = random_exact(rng, 6, 5, 1000), b = random_exact(rng, 6, 5, 1000), c = random_exact(rng, 4, 5, 1000);
    ExactPoly expect = exact_add(exact_mul(a, b), c);
    MmPoly got = mm_add(mm_mul(mm_of(ring, a), mm_of(ring, b)), mm_of(ring, c));
    EXPECT_EQ(reconstruct(got), expect);
  }
}

TEST(MmPoly, LaneIndependence) {
  auto ring = make_ring(PrimeBasis({65537, 65539, 65543}));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    ExactPoly a = random_exact(rng, 5, 4, 1 << 20), b = random_exact(rng, 5, 4, 1 << 20);
    MmPoly fa = mm_of(ring, a), fb = mm_of(ring, b);
    MmPoly prod = mm_mul(fa, fb, true);
    for (std::size_t lane = 0; lane < 3; ++lane) {
      auto lr = make_ring(PrimeBasis({ring->basis[lane]}));
      EXPECT_EQ(prod.project_lane(lane, lr), mm_mul(fa.project_lane(lane, lr), fb.project_lane(lane, lr), true));
    }
  }
}

TEST(MmPoly, SubstituteAndEvaluate) {
  auto ring = make_ring(small_basis());
  MmPoly one = MmPoly::constant(ring, cv({1, 1, 1}));
  // f = 2*x3*x2 + x1 ; substitute x3 := 1 - x1
  MmPoly f = mm_add(mm_scale(mm_mul(MmPoly::variable(ring, 3), MmPoly::variable(ring, 2)), cv({2, 2, 2})),
                    MmPoly::variable(ring, 1));
  MmPoly g = f.substitute(3, mm_sub(one, MmPoly::variable(ring, 1)), true);
  for (unsigned bits = 0; bits < 4; ++bits) {
    auto val = [&](Var v) { return v == 1 ? (bits & 1) != 0 : v == 2 ? (bits & 2) != 0 : false; };
    int x1 = bits & 1, x2 = (bits >> 1) & 1;
    int expect = 2 * (1 - x1) * x2 + x1;
    EXPECT_EQ(g.evaluate(val), mm_reduce_scalar(expect, ring->basis));
  }
  EXPECT_EQ(g.support(), (std::vector<Var>{1, 2}));
}

TEST(PolyText, ParseAndFormat) {
  auto terms = parse_poly_text("8*s3+4*s2 - 4*a1*b1 - a0*b0 + 7 - x^2");
  ASSERT_EQ(terms.size(), 6u);
  EXPECT_EQ(terms[0].coeff, 8);
  EXPECT_EQ(terms[2].coeff, -4);
  EXPECT_EQ(terms[4].factors.size(), 0u);
  EXPECT_EQ(terms[5].factors[0].second, 2u);
  EXPECT_THROW(parse_poly_text("3*+x"), PolyParseError);
  EXPECT_THROW(parse_poly_text(""), PolyParseError);

  auto ring = make_ring(small_basis());
  MmPoly f = MmPoly::from_terms(ring, {{Monomial::variable(3), mm_reduce_scalar(-5, ring->basis)},
                                       {Monomial({{1, 1}, {2, 1}}), mm_reduce_scalar(4, ring->basis)},
                                       {Monomial(), mm_reduce_scalar(1, ring->basis)}});
  std::string text = format_poly(f, [](Var v) { return "x" + std::to_string(v); });
  EXPECT_EQ(text, "-5*x3+4*x2*x1+1");
  EXPECT_EQ(parse_poly_text(text).size(), 3u);
}
