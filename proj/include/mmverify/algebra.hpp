#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace mmv {

using Var = std::uint32_t;
using Residue = std::uint32_t;
using BigInt = boost::multiprecision::cpp_int;

class AlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a coefficient vector has a zero lane where an inverse is needed.
class NonInvertible : public AlgebraError {
 public:
  explicit NonInvertible(std::size_t lane);
  std::size_t lane() const { return lane_; }

 private:
  std::size_t lane_;
};

// Single-modulus helpers. Moduli are below 2^32, so products fit in 64 bits.
inline Residue add_mod(Residue a, Residue b, Residue p) {
  std::uint64_t s = std::uint64_t{a} + b;
  return static_cast<Residue>(s >= p ? s - p : s);
}
inline Residue sub_mod(Residue a, Residue b, Residue p) {
  return a >= b ? a - b : static_cast<Residue>(std::uint64_t{a} + p - b);
}
inline Residue mul_mod(Residue a, Residue b, Residue p) {
  return static_cast<Residue>(std::uint64_t{a} * b % p);
}
inline Residue neg_mod(Residue a, Residue p) { return a == 0 ? 0 : p - a; }
Residue pow_mod(Residue base, std::uint64_t e, Residue p);
/// Inverse modulo a prime; `a` must be nonzero mod p.
Residue inv_mod(Residue a, Residue p);
Residue reduce_int(std::int64_t x, Residue p);
Residue reduce_big(const BigInt& x, Residue p);
/// Lift a residue to the symmetric range (-p/2, p/2].
std::int64_t symmetric(Residue r, Residue p);
bool is_prime(std::uint64_t n);

/// Moduli m_1..m_k, pairwise distinct primes, with their exact product.
class PrimeBasis {
 public:
  PrimeBasis() = default;
  explicit PrimeBasis(std::vector<Residue> primes, BigInt bound = 0);

  /// The smallest primes above 2^bits, ascending, as few as make the product exceed `bound`.
  static PrimeBasis for_bound(const BigInt& bound, unsigned prime_bits);

  std::size_t size() const { return primes_.size(); }
  Residue operator[](std::size_t i) const { return primes_[i]; }
  std::span<const Residue> primes() const { return primes_; }
  const BigInt& product() const { return product_; }
  const BigInt& bound() const { return bound_; }

  /// Number of products of two residues that fit in an unsigned 64-bit accumulator.
  std::uint64_t accumulation_window() const { return window_; }

  friend bool operator==(const PrimeBasis& a, const PrimeBasis& b) { return a.primes_ == b.primes_; }

 private:
  std::vector<Residue> primes_;
  BigInt product_ = 1;
  BigInt bound_ = 0;
  std::uint64_t window_ = 1;
};

/// One residue per prime lane.
class CoeffVec {
 public:
  CoeffVec() = default;
  explicit CoeffVec(std::size_t lanes, Residue fill = 0) : lanes_(lanes, fill) {}
  explicit CoeffVec(std::vector<Residue> lanes) : lanes_(std::move(lanes)) {}

  std::size_t size() const { return lanes_.size(); }
  Residue operator[](std::size_t i) const { return lanes_[i]; }
  Residue& operator[](std::size_t i) { return lanes_[i]; }
  std::span<const Residue> lanes() const { return lanes_; }
  bool is_zero() const;
  bool all_nonzero() const;

  friend bool operator==(const CoeffVec&, const CoeffVec&) = default;

 private:
  std::vector<Residue> lanes_;
};

CoeffVec mm_reduce_scalar(const BigInt& x, const PrimeBasis& basis);
CoeffVec mm_inv(const CoeffVec& c, const PrimeBasis& basis);
CoeffVec mm_mul(const CoeffVec& a, const CoeffVec& b, const PrimeBasis& basis);
CoeffVec mm_neg(const CoeffVec& a, const PrimeBasis& basis);
/// Unique representative in (-P/2, P/2] of the residues, P = product of the primes.
BigInt crt_reconstruct(const CoeffVec& c, const PrimeBasis& basis);

struct Factor {
  Var var;
  std::uint32_t exp;
  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Power product with factors sorted by strictly increasing variable id.
class Monomial {
 public:
  Monomial() = default;
  /// Accepts factors in any order; merges repeated variables and drops zero exponents.
  explicit Monomial(std::vector<Factor> factors);
  static Monomial variable(Var v, std::uint32_t exp = 1);

  std::span<const Factor> factors() const { return factors_; }
  std::uint32_t degree() const { return degree_; }
  bool is_one() const { return factors_.empty(); }
  std::uint32_t exponent(Var v) const;
  bool contains(Var v) const { return exponent(v) > 0; }
  /// Highest variable id present (the maximal variable under identity ranking).
  Var max_var() const { return factors_.back().var; }

  bool divides(const Monomial& other) const;
  /// this / divisor; divisor must divide this.
  Monomial quotient(const Monomial& divisor) const;
  Monomial boolean_reduced() const;
  bool is_multilinear() const;

  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<Factor> factors_;
  std::uint32_t degree_ = 0;
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const noexcept;
};

/// Total multiplicative order on monomials, driven by a variable ranking.
class MonomialOrder {
 public:
  enum class Kind { Lex, DegLex };

  /// Ranking equals variable id.
  explicit MonomialOrder(Kind kind = Kind::Lex) : kind_(kind) {}
  /// rank[v] for every variable that can appear; must be injective.
  MonomialOrder(Kind kind, std::vector<std::uint32_t> rank);

  Kind kind() const { return kind_; }
  std::uint32_t rank(Var v) const { return identity_ ? v : rank_[v]; }
  std::strong_ordering compare(const Monomial& a, const Monomial& b) const;
  bool less(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }

  friend bool operator==(const MonomialOrder& a, const MonomialOrder& b) {
    return a.kind_ == b.kind_ && a.identity_ == b.identity_ && a.rank_ == b.rank_;
  }

 private:
  std::strong_ordering compare_lex(const Monomial& a, const Monomial& b) const;

  Kind kind_;
  bool identity_ = true;
  std::vector<std::uint32_t> rank_;
};

/// Coefficient domain and term order shared by all polynomials of one computation.
struct Ring {
  PrimeBasis basis;
  MonomialOrder order;
};
using RingPtr = std::shared_ptr<const Ring>;
RingPtr make_ring(PrimeBasis basis, MonomialOrder order = MonomialOrder{});

/// Polynomial whose coefficients are residue vectors, one lane per prime.
///
/// Terms are kept sorted in descending monomial order; no stored coefficient
/// vector is all-zero. Coefficients are stored term-major: the k lanes of a
/// term are contiguous.
class MmPoly {
 public:
  explicit MmPoly(RingPtr ring) : ring_(std::move(ring)) {}

  static MmPoly constant(RingPtr ring, const CoeffVec& c);
  static MmPoly variable(RingPtr ring, Var v);
  /// Sorts, merges duplicates and drops zeros.
  static MmPoly from_terms(RingPtr ring, std::vector<std::pair<Monomial, CoeffVec>> terms);

  const RingPtr& ring() const { return ring_; }
  const PrimeBasis& basis() const { return ring_->basis; }
  std::size_t lanes() const { return ring_->basis.size(); }

  std::size_t size() const { return monos_.size(); }
  bool is_zero() const { return monos_.empty(); }
  const Monomial& monomial(std::size_t t) const { return monos_[t]; }
  std::span<const Residue> coeff(std::size_t t) const {
    return {coeffs_.data() + t * lanes(), lanes()};
  }
  CoeffVec coeff_vec(std::size_t t) const;
  /// Coefficient of `m`, zero vector when absent.
  CoeffVec coeff_of(const Monomial& m) const;

  bool is_linear() const;
  std::uint32_t degree() const;
  /// Variables appearing in any term, ascending.
  std::vector<Var> support() const;

  /// Lane-wise evaluation at a Boolean point given by `value(var)`.
  CoeffVec evaluate(const std::function<bool(Var)>& value) const;

  /// Replace every monomial by its Boolean reduction (exponents capped at 1).
  MmPoly boolean_reduced() const;
  /// Substitute `replacement` for every occurrence of `v`.
  MmPoly substitute(Var v, const MmPoly& replacement, bool boolean_reduce) const;

  /// Keep only lane `lane`, as a polynomial over the one-prime ring `lane_ring`.
  MmPoly project_lane(std::size_t lane, RingPtr lane_ring) const;

  friend bool operator==(const MmPoly& a, const MmPoly& b) {
    return a.monos_ == b.monos_ && a.coeffs_ == b.coeffs_;
  }

  // Mutation used by the free functions below.
  void push_back_term(Monomial m, std::span<const Residue> c);
  void reserve(std::size_t terms);

 private:
  RingPtr ring_;
  std::vector<Monomial> monos_;
  std::vector<Residue> coeffs_;
};

MmPoly mm_add(const MmPoly& f, const MmPoly& g);
MmPoly mm_sub(const MmPoly& f, const MmPoly& g);
MmPoly mm_scale(const MmPoly& f, const CoeffVec& c);
MmPoly mm_mul(const MmPoly& f, const MmPoly& g, bool boolean_reduce = false);
/// c * m * g
MmPoly mm_mul_term(const MmPoly& g, const Monomial& m, const CoeffVec& c, bool boolean_reduce = false);

struct LeadingTerm {
  Monomial monomial;
  CoeffVec coeff;
};
LeadingTerm leading_term(const MmPoly& f);

/// spec - (lc(spec) * lc(rel)^-1) * (lm(spec) / lm(rel)) * rel
MmPoly reduce_step(const MmPoly& spec, const MmPoly& rel, bool boolean_reduce = false);

void check_same_ring(const MmPoly& f, const MmPoly& g);

}  // namespace mmv
