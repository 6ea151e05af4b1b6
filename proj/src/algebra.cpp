#include "mmverify/algebra.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <unordered_map>

namespace mmv {

NonInvertible::NonInvertible(std::size_t lane)
    : AlgebraError("coefficient not invertible in lane " + std::to_string(lane)), lane_(lane) {}

Residue pow_mod(Residue base, std::uint64_t e, Residue p) {
  std::uint64_t result = 1 % p;
  std::uint64_t b = base % p;
  while (e > 0) {
    if (e & 1) result = result * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return static_cast<Residue>(result);
}

Residue inv_mod(Residue a, Residue p) {
  // Extended Euclid; p need not be prime as long as gcd(a, p) = 1.
  std::int64_t t = 0, new_t = 1;
  std::int64_t r = p, new_r = a % p;
  while (new_r != 0) {
    std::int64_t q = r / new_r;
    std::tie(t, new_t) = std::make_pair(new_t, t - q * new_t);
    std::tie(r, new_r) = std::make_pair(new_r, r - q * new_r);
  }
  if (r != 1) throw AlgebraError("inverse does not exist");
  if (t < 0) t += p;
  return static_cast<Residue>(t);
}

Residue reduce_int(std::int64_t x, Residue p) {
  std::int64_t r = x % static_cast<std::int64_t>(p);
  if (r < 0) r += p;
  return static_cast<Residue>(r);
}

Residue reduce_big(const BigInt& x, Residue p) {
  BigInt r = x % p;
  if (r < 0) r += p;
  return static_cast<Residue>(r);
}

std::int64_t symmetric(Residue r, Residue p) {
  return r > p / 2 ? static_cast<std::int64_t>(r) - static_cast<std::int64_t>(p)
                   : static_cast<std::int64_t>(r);
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d : {2u, 3u, 5u, 7u, 11u, 13u}) {
    if (n % d == 0) return n == d;
  }
  for (std::uint64_t d = 17; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// PrimeBasis

PrimeBasis::PrimeBasis(std::vector<Residue> primes, BigInt bound)
    : primes_(std::move(primes)), bound_(std::move(bound)) {
  if (primes_.empty()) throw AlgebraError("prime basis must not be empty");
  std::vector<Residue> sorted = primes_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw AlgebraError("prime basis contains a repeated modulus");
  Residue largest = sorted.back();
  for (Residue p : primes_) {
    if (!is_prime(p)) throw AlgebraError("modulus " + std::to_string(p) + " is not prime");
    product_ *= p;
  }
  if (bound_ != 0 && product_ <= bound_)
    throw AlgebraError("product of primes does not exceed the evaluation bound");
  // Products of two residues are < largest^2; count how many fit below 2^64.
  unsigned bits = 2 * std::bit_width(largest);
  window_ = bits >= 64 ? 1 : (std::uint64_t{1} << (64 - bits));
}

PrimeBasis PrimeBasis::for_bound(const BigInt& bound, unsigned prime_bits) {
  if (prime_bits < 2 || prime_bits > 31) throw AlgebraError("prime width must be in [2, 31]");
  std::vector<Residue> primes;
  BigInt product = 1;
  std::uint64_t candidate = (std::uint64_t{1} << prime_bits) + 1;
  while (product <= bound) {
    while (!is_prime(candidate)) ++candidate;
    primes.push_back(static_cast<Residue>(candidate));
    product *= candidate;
    ++candidate;
  }
  if (primes.empty()) {
    while (!is_prime(candidate)) ++candidate;
    primes.push_back(static_cast<Residue>(candidate));
  }
  return PrimeBasis(std::move(primes), bound);
}

// ---------------------------------------------------------------------------
// CoeffVec

bool CoeffVec::is_zero() const {
  return std::all_of(lanes_.begin(), lanes_.end(), [](Residue r) { return r == 0; });
}

bool CoeffVec::all_nonzero() const {
  return std::all_of(lanes_.begin(), lanes_.end(), [](Residue r) { return r != 0; });
}

CoeffVec mm_reduce_scalar(const BigInt& x, const PrimeBasis& basis) {
  CoeffVec out(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) out[i] = reduce_big(x, basis[i]);
  return out;
}

CoeffVec mm_inv(const CoeffVec& c, const PrimeBasis& basis) {
  CoeffVec out(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (c[i] % basis[i] == 0) throw NonInvertible(i);
    out[i] = inv_mod(c[i], basis[i]);
  }
  return out;
}

CoeffVec mm_mul(const CoeffVec& a, const CoeffVec& b, const PrimeBasis& basis) {
  CoeffVec out(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) out[i] = mul_mod(a[i], b[i], basis[i]);
  return out;
}

CoeffVec mm_neg(const CoeffVec& a, const PrimeBasis& basis) {
  CoeffVec out(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) out[i] = neg_mod(a[i], basis[i]);
  return out;
}

BigInt crt_reconstruct(const CoeffVec& c, const PrimeBasis& basis) {
  const BigInt& product = basis.product();
  BigInt x = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    Residue p = basis[i];
    BigInt partial = product / p;
    Residue partial_mod = reduce_big(partial, p);
    Residue weight = mul_mod(c[i] % p, inv_mod(partial_mod, p), p);
    x += partial * weight;
  }
  x %= product;
  if (x * 2 > product) x -= product;
  return x;
}

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(std::vector<Factor> factors) {
  std::sort(factors.begin(), factors.end(), [](const Factor& a, const Factor& b) { return a.var < b.var; });
  for (const Factor& f : factors) {
    if (f.exp == 0) continue;
    if (!factors_.empty() && factors_.back().var == f.var) {
      factors_.back().exp += f.exp;
    } else {
      factors_.push_back(f);
    }
    degree_ += f.exp;
  }
}

Monomial Monomial::variable(Var v, std::uint32_t exp) {
  Monomial m;
  if (exp > 0) {
    m.factors_.push_back({v, exp});
    m.degree_ = exp;
  }
  return m;
}

std::uint32_t Monomial::exponent(Var v) const {
  auto it = std::lower_bound(factors_.begin(), factors_.end(), v,
                             [](const Factor& f, Var x) { return f.var < x; });
  return it != factors_.end() && it->var == v ? it->exp : 0;
}

bool Monomial::divides(const Monomial& other) const {
  std::size_t j = 0;
  for (const Factor& f : factors_) {
    while (j < other.factors_.size() && other.factors_[j].var < f.var) ++j;
    if (j == other.factors_.size() || other.factors_[j].var != f.var || other.factors_[j].exp < f.exp)
      return false;
  }
  return true;
}

Monomial Monomial::quotient(const Monomial& divisor) const {
  Monomial out;
  std::size_t j = 0;
  for (const Factor& f : factors_) {
    std::uint32_t e = f.exp;
    while (j < divisor.factors_.size() && divisor.factors_[j].var < f.var) ++j;
    if (j < divisor.factors_.size() && divisor.factors_[j].var == f.var) {
      if (divisor.factors_[j].exp > e) throw AlgebraError("monomial does not divide");
      e -= divisor.factors_[j].exp;
    }
    if (e > 0) {
      out.factors_.push_back({f.var, e});
      out.degree_ += e;
    }
  }
  if (out.degree_ + divisor.degree_ != degree_) throw AlgebraError("monomial does not divide");
  return out;
}

Monomial Monomial::boolean_reduced() const {
  Monomial out;
  out.factors_ = factors_;
  for (Factor& f : out.factors_) f.exp = 1;
  out.degree_ = static_cast<std::uint32_t>(out.factors_.size());
  return out;
}

bool Monomial::is_multilinear() const { return degree_ == factors_.size(); }

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.factors_.reserve(a.factors_.size() + b.factors_.size());
  std::size_t i = 0, j = 0;
  while (i < a.factors_.size() || j < b.factors_.size()) {
    if (j == b.factors_.size() || (i < a.factors_.size() && a.factors_[i].var < b.factors_[j].var)) {
      out.factors_.push_back(a.factors_[i++]);
    } else if (i == a.factors_.size() || b.factors_[j].var < a.factors_[i].var) {
      out.factors_.push_back(b.factors_[j++]);
    } else {
      out.factors_.push_back({a.factors_[i].var, a.factors_[i].exp + b.factors_[j].exp});
      ++i;
      ++j;
    }
  }
  out.degree_ = a.degree_ + b.degree_;
  return out;
}

std::size_t MonomialHash::operator()(const Monomial& m) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (const Factor& f : m.factors()) {
    h ^= (std::size_t{f.var} * 0x100000001b3ULL + f.exp) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------------------
// MonomialOrder

MonomialOrder::MonomialOrder(Kind kind, std::vector<std::uint32_t> rank)
    : kind_(kind), identity_(false), rank_(std::move(rank)) {
  std::vector<std::uint32_t> sorted = rank_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw AlgebraError("variable ranking must be injective");
  bool monotone = true;
  for (std::size_t v = 0; v < rank_.size(); ++v) monotone = monotone && rank_[v] == v;
  if (monotone) {
    identity_ = true;
    rank_.clear();
  }
}

std::strong_ordering MonomialOrder::compare(const Monomial& a, const Monomial& b) const {
  if (kind_ == Kind::DegLex && a.degree() != b.degree()) return a.degree() <=> b.degree();
  return compare_lex(a, b);
}

std::strong_ordering MonomialOrder::compare_lex(const Monomial& a, const Monomial& b) const {
  auto fa = a.factors();
  auto fb = b.factors();
  if (identity_) {
    std::size_t i = fa.size(), j = fb.size();
    while (i > 0 && j > 0) {
      const Factor& x = fa[i - 1];
      const Factor& y = fb[j - 1];
      if (x.var != y.var) return x.var <=> y.var;
      if (x.exp != y.exp) return x.exp <=> y.exp;
      --i;
      --j;
    }
    return i <=> j;
  }
  auto ranked = [this](std::span<const Factor> fs) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    out.reserve(fs.size());
    for (const Factor& f : fs) out.emplace_back(rank_.at(f.var), f.exp);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
  };
  auto ra = ranked(fa);
  auto rb = ranked(fb);
  std::size_t n = std::min(ra.size(), rb.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (ra[k].first != rb[k].first) return ra[k].first <=> rb[k].first;
    if (ra[k].second != rb[k].second) return ra[k].second <=> rb[k].second;
  }
  return ra.size() <=> rb.size();
}

RingPtr make_ring(PrimeBasis basis, MonomialOrder order) {
  return std::make_shared<const Ring>(Ring{std::move(basis), std::move(order)});
}

// ---------------------------------------------------------------------------
// MmPoly

namespace {

/// Sums residue vectors lane-wise, deferring the modular reduction until the
/// 64-bit accumulators could overflow.
class LaneAccumulator {
 public:
  explicit LaneAccumulator(const PrimeBasis& basis) : basis_(basis), acc_(basis.size(), 0) {}
  void add_product(std::span<const Residue> a, std::span<const Residue> b) {
    for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += std::uint64_t{a[i]} * b[i];
    if (++pending_ >= basis_.accumulation_window() - 1) flush();
  }
  void add(std::span<const Residue> a) {
    for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += a[i];
    if (++pending_ >= basis_.accumulation_window() - 1) flush();
  }
  void flush() {
    for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] %= basis_[i];
    pending_ = 0;
  }
  CoeffVec result() {
    flush();
    CoeffVec out(acc_.size());
    for (std::size_t i = 0; i < acc_.size(); ++i) out[i] = static_cast<Residue>(acc_[i]);
    return out;
  }

 private:
  const PrimeBasis& basis_;
  std::vector<std::uint64_t> acc_;
  std::uint64_t pending_ = 0;
};

}  // namespace

void check_same_ring(const MmPoly& f, const MmPoly& g) {
  if (f.ring() == g.ring()) return;
  if (!(f.ring()->basis == g.ring()->basis)) throw AlgebraError("prime basis mismatch");
  if (!(f.ring()->order == g.ring()->order)) throw AlgebraError("monomial order mismatch");
}

void MmPoly::push_back_term(Monomial m, std::span<const Residue> c) {
  monos_.push_back(std::move(m));
  coeffs_.insert(coeffs_.end(), c.begin(), c.end());
}

void MmPoly::reserve(std::size_t terms) {
  monos_.reserve(terms);
  coeffs_.reserve(terms * lanes());
}

MmPoly MmPoly::constant(RingPtr ring, const CoeffVec& c) {
  MmPoly out(std::move(ring));
  if (!c.is_zero()) out.push_back_term(Monomial{}, c.lanes());
  return out;
}

MmPoly MmPoly::variable(RingPtr ring, Var v) {
  MmPoly out(ring);
  CoeffVec one(ring->basis.size(), 1);
  out.push_back_term(Monomial::variable(v), one.lanes());
  return out;
}

MmPoly MmPoly::from_terms(RingPtr ring, std::vector<std::pair<Monomial, CoeffVec>> terms) {
  const MonomialOrder& order = ring->order;
  const PrimeBasis& basis = ring->basis;
  std::sort(terms.begin(), terms.end(),
            [&](const auto& a, const auto& b) { return order.compare(a.first, b.first) > 0; });
  MmPoly out(ring);
  out.reserve(terms.size());
  std::size_t i = 0;
  while (i < terms.size()) {
    CoeffVec acc(basis.size());
    std::size_t j = i;
    for (; j < terms.size() && terms[j].first == terms[i].first; ++j) {
      for (std::size_t l = 0; l < basis.size(); ++l)
        acc[l] = add_mod(acc[l], terms[j].second[l] % basis[l], basis[l]);
    }
    if (!acc.is_zero()) out.push_back_term(std::move(terms[i].first), acc.lanes());
    i = j;
  }
  return out;
}

CoeffVec MmPoly::coeff_vec(std::size_t t) const {
  auto c = coeff(t);
  return CoeffVec(std::vector<Residue>(c.begin(), c.end()));
}

CoeffVec MmPoly::coeff_of(const Monomial& m) const {
  const MonomialOrder& order = ring_->order;
  auto it = std::lower_bound(monos_.begin(), monos_.end(), m,
                             [&](const Monomial& a, const Monomial& b) { return order.compare(a, b) > 0; });
  if (it != monos_.end() && *it == m) return coeff_vec(static_cast<std::size_t>(it - monos_.begin()));
  return CoeffVec(lanes());
}

bool MmPoly::is_linear() const {
  return std::all_of(monos_.begin(), monos_.end(), [](const Monomial& m) { return m.degree() <= 1; });
}

std::uint32_t MmPoly::degree() const {
  std::uint32_t d = 0;
  for (const Monomial& m : monos_) d = std::max(d, m.degree());
  return d;
}

std::vector<Var> MmPoly::support() const {
  std::vector<Var> vars;
  for (const Monomial& m : monos_)
    for (const Factor& f : m.factors()) vars.push_back(f.var);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

CoeffVec MmPoly::evaluate(const std::function<bool(Var)>& value) const {
  LaneAccumulator acc(basis());
  for (std::size_t t = 0; t < size(); ++t) {
    bool on = true;
    for (const Factor& f : monos_[t].factors()) {
      if (!value(f.var)) {
        on = false;
        break;
      }
    }
    if (on) acc.add(coeff(t));
  }
  return acc.result();
}

MmPoly MmPoly::boolean_reduced() const {
  std::vector<std::pair<Monomial, CoeffVec>> terms;
  terms.reserve(size());
  bool changed = false;
  for (std::size_t t = 0; t < size(); ++t) {
    changed = changed || !monos_[t].is_multilinear();
    terms.emplace_back(monos_[t].boolean_reduced(), coeff_vec(t));
  }
  if (!changed) return *this;
  return from_terms(ring_, std::move(terms));
}

MmPoly MmPoly::substitute(Var v, const MmPoly& replacement, bool boolean_reduce) const {
  check_same_ring(*this, replacement);
  MmPoly untouched(ring_);
  std::vector<std::pair<Monomial, CoeffVec>> touched;
  for (std::size_t t = 0; t < size(); ++t) {
    if (monos_[t].contains(v)) {
      touched.emplace_back(monos_[t], coeff_vec(t));
    } else {
      untouched.push_back_term(monos_[t], coeff(t));
    }
  }
  if (touched.empty()) return *this;
  // Gather every product term and combine once.
  std::vector<std::pair<Monomial, CoeffVec>> terms;
  for (std::size_t t = 0; t < untouched.size(); ++t) terms.emplace_back(untouched.monomial(t), untouched.coeff_vec(t));
  const PrimeBasis& basis = ring_->basis;
  for (auto& [m, c] : touched) {
    std::uint32_t e = m.exponent(v);
    Monomial rest = m.quotient(Monomial::variable(v, e));
    if (boolean_reduce) e = 1;
    MmPoly power = replacement;
    for (std::uint32_t k = 1; k < e; ++k) power = mm_mul(power, replacement, boolean_reduce);
    for (std::size_t t = 0; t < power.size(); ++t) {
      Monomial pm = power.monomial(t) * rest;
      if (boolean_reduce) pm = pm.boolean_reduced();
      terms.emplace_back(std::move(pm), mm_mul(power.coeff_vec(t), c, basis));
    }
  }
  return from_terms(ring_, std::move(terms));
}

MmPoly MmPoly::project_lane(std::size_t lane, RingPtr lane_ring) const {
  MmPoly out(std::move(lane_ring));
  for (std::size_t t = 0; t < size(); ++t) {
    Residue r = coeff(t)[lane];
    if (r != 0) out.push_back_term(monos_[t], std::span<const Residue>(&r, 1));
  }
  return out;
}

MmPoly mm_add(const MmPoly& f, const MmPoly& g) {
  check_same_ring(f, g);
  const MonomialOrder& order = f.ring()->order;
  const PrimeBasis& basis = f.basis();
  const std::size_t k = basis.size();
  MmPoly out(f.ring());
  out.reserve(f.size() + g.size());
  std::size_t i = 0, j = 0;
  std::vector<Residue> sum(k);
  while (i < f.size() || j < g.size()) {
    std::strong_ordering cmp = std::strong_ordering::equal;
    if (i == f.size()) {
      cmp = std::strong_ordering::less;
    } else if (j == g.size()) {
      cmp = std::strong_ordering::greater;
    } else {
      cmp = order.compare(f.monomial(i), g.monomial(j));
    }
    if (cmp > 0) {
      out.push_back_term(f.monomial(i), f.coeff(i));
      ++i;
    } else if (cmp < 0) {
      out.push_back_term(g.monomial(j), g.coeff(j));
      ++j;
    } else {
      auto a = f.coeff(i);
      auto b = g.coeff(j);
      bool zero = true;
      for (std::size_t l = 0; l < k; ++l) {
        sum[l] = add_mod(a[l], b[l], basis[l]);
        zero = zero && sum[l] == 0;
      }
      if (!zero) out.push_back_term(f.monomial(i), sum);
      ++i;
      ++j;
    }
  }
  return out;
}

MmPoly mm_scale(const MmPoly& f, const CoeffVec& c) {
  const PrimeBasis& basis = f.basis();
  if (c.size() != basis.size()) throw AlgebraError("prime basis mismatch");
  MmPoly out(f.ring());
  out.reserve(f.size());
  std::vector<Residue> prod(basis.size());
  for (std::size_t t = 0; t < f.size(); ++t) {
    auto a = f.coeff(t);
    bool zero = true;
    for (std::size_t l = 0; l < basis.size(); ++l) {
      prod[l] = mul_mod(a[l], c[l], basis[l]);
      zero = zero && prod[l] == 0;
    }
    if (!zero) out.push_back_term(f.monomial(t), prod);
  }
  return out;
}

MmPoly mm_sub(const MmPoly& f, const MmPoly& g) {
  return mm_add(f, mm_scale(g, mm_neg(CoeffVec(g.lanes(), 1), g.basis())));
}

MmPoly mm_mul_term(const MmPoly& g, const Monomial& m, const CoeffVec& c, bool boolean_reduce) {
  const PrimeBasis& basis = g.basis();
  if (c.size() != basis.size()) throw AlgebraError("prime basis mismatch");
  if (!boolean_reduce) {
    // Multiplication by a monomial preserves the order, so terms stay sorted.
    MmPoly out(g.ring());
    out.reserve(g.size());
    std::vector<Residue> prod(basis.size());
    for (std::size_t t = 0; t < g.size(); ++t) {
      auto a = g.coeff(t);
      bool zero = true;
      for (std::size_t l = 0; l < basis.size(); ++l) {
        prod[l] = mul_mod(a[l], c[l], basis[l]);
        zero = zero && prod[l] == 0;
      }
      if (!zero) out.push_back_term(g.monomial(t) * m, prod);
    }
    return out;
  }
  std::vector<std::pair<Monomial, CoeffVec>> terms;
  terms.reserve(g.size());
  for (std::size_t t = 0; t < g.size(); ++t) {
    terms.emplace_back((g.monomial(t) * m).boolean_reduced(), mm_mul(g.coeff_vec(t), c, basis));
  }
  return MmPoly::from_terms(g.ring(), std::move(terms));
}

MmPoly mm_mul(const MmPoly& f, const MmPoly& g, bool boolean_reduce) {
  check_same_ring(f, g);
  const PrimeBasis& basis = f.basis();
  std::unordered_map<Monomial, std::size_t, MonomialHash> index;
  std::vector<Monomial> monos;
  std::vector<LaneAccumulator> accs;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      Monomial m = f.monomial(i) * g.monomial(j);
      if (boolean_reduce) m = m.boolean_reduced();
      auto [it, inserted] = index.try_emplace(m, monos.size());
      if (inserted) {
        monos.push_back(std::move(m));
        accs.emplace_back(basis);
      }
      accs[it->second].add_product(f.coeff(i), g.coeff(j));
    }
  }
  std::vector<std::pair<Monomial, CoeffVec>> terms;
  terms.reserve(monos.size());
  for (std::size_t t = 0; t < monos.size(); ++t) terms.emplace_back(std::move(monos[t]), accs[t].result());
  return MmPoly::from_terms(f.ring(), std::move(terms));
}

LeadingTerm leading_term(const MmPoly& f) {
  if (f.is_zero()) throw AlgebraError("zero polynomial has no leading term");
  return {f.monomial(0), f.coeff_vec(0)};
}

MmPoly reduce_step(const MmPoly& spec, const MmPoly& rel, bool boolean_reduce) {
  check_same_ring(spec, rel);
  LeadingTerm ls = leading_term(spec);
  LeadingTerm lr = leading_term(rel);
  if (!lr.monomial.divides(ls.monomial)) throw AlgebraError("leading monomial of relation does not divide");
  CoeffVec factor = mm_mul(ls.coeff, mm_inv(lr.coeff, rel.basis()), rel.basis());
  Monomial q = ls.monomial.quotient(lr.monomial);
  return mm_add(spec, mm_mul_term(rel, q, mm_neg(factor, rel.basis()), boolean_reduce));
}

}  // namespace mmv
