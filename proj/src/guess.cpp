#include "mmverify/guess.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>
#include <sstream>

namespace mmv {

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_((cols + 63) / 64), bits_(rows * ((cols + 63) / 64), 0) {}

void BitMatrix::set(std::size_t r, std::size_t c, bool v) {
  std::uint64_t& w = bits_[r * words_ + c / 64];
  std::uint64_t mask = std::uint64_t{1} << (c % 64);
  w = v ? (w | mask) : (w & ~mask);
}

void BitMatrix::append_row(std::span<const std::uint8_t> values) {
  if (values.size() != cols_) throw GuessError("row width mismatch");
  bits_.resize(bits_.size() + words_, 0);
  ++rows_;
  for (std::size_t c = 0; c < cols_; ++c)
    if (values[c]) set(rows_ - 1, c, true);
}

BitMatrix BitMatrix::transposed() const {
  BitMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto w = row(r);
    for (std::size_t k = 0; k < words_; ++k) {
      for (std::uint64_t x = w[k]; x; x &= x - 1) t.set(k * 64 + std::countr_zero(x), r, true);
    }
  }
  return t;
}

std::vector<std::uint8_t> SampleMatrix::row_of(const Sample& s) const {
  std::vector<std::uint8_t> r(columns.size() + 1, 1);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= s.values.size()) throw GuessError("sample lacks column " + std::to_string(columns[j]));
    r[j] = s.values[columns[j]];
  }
  return r;
}

void SampleMatrix::append(const Sample& s) { bits.append_row(row_of(s)); }

bool SampleMatrix::contains_row(const Sample& s) const {
  BitMatrix probe(1, cols());
  auto r = row_of(s);
  for (std::size_t c = 0; c < r.size(); ++c) probe.set(0, c, r[c] != 0);
  for (std::size_t i = 0; i < rows(); ++i)
    if (std::equal(probe.row(0).begin(), probe.row(0).end(), bits.row(i).begin())) return true;
  return false;
}

SampleMatrix build_matrix(std::span<const Sample> samples, std::span<const std::size_t> columns) {
  SampleMatrix a;
  a.columns.assign(columns.begin(), columns.end());
  a.bits = BitMatrix(0, columns.size() + 1);
  for (const Sample& s : samples) a.append(s);
  return a;
}

namespace {

BitMatrix random_bits(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  BitMatrix b(rows, cols);
  std::mt19937_64 rng(derive_seed(seed, 0));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) b.set(r, c, (rng() >> 63) != 0);
  return b;
}

}  // namespace

Projection project_with(const SampleMatrix& a, BitMatrix b) {
  if (b.cols() != a.rows()) throw GuessError("projection width must equal the sample count");
  Projection p;
  p.n = a.cols();
  p.ba.assign(p.n * p.n, 0);
  BitMatrix at = a.bits.transposed();  // column j of A as a bit row
  for (std::size_t i = 0; i < b.rows(); ++i) {
    auto bi = b.row(i);
    for (std::size_t j = 0; j < p.n; ++j) {
      auto aj = at.row(j);
      std::uint32_t s = 0;
      for (std::size_t k = 0; k < bi.size(); ++k) s += static_cast<std::uint32_t>(std::popcount(bi[k] & aj[k]));
      p.ba[i * p.n + j] = s;
    }
  }
  p.b = std::move(b);
  return p;
}

Projection project(const SampleMatrix& a, std::uint64_t seed) {
  if (a.rows() < a.cols()) throw GuessError("underdetermined sample matrix: more samples needed");
  return project_with(a, random_bits(a.cols(), a.rows(), seed));
}

void fold_row(Projection& proj, std::span<const std::uint8_t> row, std::uint64_t seed) {
  if (row.size() != proj.n) throw GuessError("row width mismatch");
  std::mt19937_64 rng(derive_seed(seed, 1));
  BitMatrix b(proj.b.rows(), proj.b.cols() + 1);
  for (std::size_t i = 0; i < proj.b.rows(); ++i) {
    for (std::size_t c = 0; c < proj.b.cols(); ++c)
      if (proj.b.get(i, c)) b.set(i, c, true);
    bool bit = (rng() >> 63) != 0;
    b.set(i, proj.b.cols(), bit);
    if (bit)
      for (std::size_t j = 0; j < proj.n; ++j) proj.ba[i * proj.n + j] += row[j];
  }
  proj.b = std::move(b);
}

ModMatrix reduce_matrix(const Projection& proj, Residue p) {
  ModMatrix m(proj.n, std::vector<Residue>(proj.n));
  for (std::size_t i = 0; i < proj.n; ++i)
    for (std::size_t j = 0; j < proj.n; ++j) m[i][j] = proj.at(i, j) % p;
  return m;
}

std::vector<std::size_t> rref_mod_p(ModMatrix& m, Residue p) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t sel = r;
    while (sel < rows && m[sel][c] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(m[r], m[sel]);
    Residue inv = inv_mod(m[r][c], p);
    for (std::size_t j = c; j < cols; ++j) m[r][j] = mul_mod(m[r][j], inv, p);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      Residue f = m[i][c];
      for (std::size_t j = c; j < cols; ++j)
        if (m[r][j]) m[i][j] = sub_mod(m[i][j], mul_mod(f, m[r][j], p), p);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

std::vector<std::vector<Residue>> nullspace_mod_p(ModMatrix m, Residue p) {
  if (m.empty()) return {};
  const std::size_t cols = m[0].size();
  auto pivots = rref_mod_p(m, p);
  std::vector<std::uint8_t> is_pivot(cols, 0);
  for (std::size_t c : pivots) is_pivot[c] = 1;
  std::vector<std::vector<Residue>> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Residue> v(cols, 0);
    v[f] = 1;
    for (std::size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = neg_mod(m[k][f], p);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::size_t CandidateRelation::terms() const {
  return static_cast<std::size_t>(std::count_if(coeffs.begin(), coeffs.end(), [](Residue c) { return c != 0; }));
}

std::uint64_t CandidateRelation::max_magnitude() const {
  std::uint64_t m = 0;
  for (Residue c : coeffs) {
    std::int64_t s = symmetric(c, p);
    m = std::max<std::uint64_t>(m, static_cast<std::uint64_t>(s < 0 ? -s : s));
  }
  return m;
}

namespace {

// Row of the basis, eliminated under `order`, whose pivot is `target`.
std::optional<CandidateRelation> pivot_row(const std::vector<std::vector<Residue>>& kernel,
                                           const std::vector<std::size_t>& order, std::size_t target, Residue p) {
  ModMatrix m;
  for (const auto& v : kernel) {
    std::vector<Residue> row(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) row[j] = v[order[j]];
    m.push_back(std::move(row));
  }
  auto pivots = rref_mod_p(m, p);
  for (std::size_t k = 0; k < pivots.size(); ++k) {
    if (order[pivots[k]] != target) continue;
    CandidateRelation rel;
    rel.p = p;
    rel.leading = target;
    rel.coeffs.assign(order.size(), 0);
    for (std::size_t j = 0; j < order.size(); ++j) rel.coeffs[order[j]] = m[k][j];
    return rel;
  }
  return std::nullopt;
}

}  // namespace

std::vector<CandidateRelation> candidates(const std::vector<std::vector<Residue>>& kernel,
                                          std::span<const ColumnInfo> columns, std::size_t target, Residue p) {
  std::vector<CandidateRelation> out;
  if (kernel.empty()) return out;
  const std::size_t n = columns.size();
  const std::uint32_t top = columns[target].rank;
  auto by_rank_desc = [&](std::size_t a, std::size_t b) {
    if (columns[a].constant != columns[b].constant) return columns[b].constant;
    return columns[a].rank > columns[b].rank;
  };

  // Standard: descending rank, constant last.
  std::vector<std::size_t> standard(n);
  std::iota(standard.begin(), standard.end(), 0);
  std::sort(standard.begin(), standard.end(), by_rank_desc);

  // Interface-preferring: eliminate higher variables and internal gates
  // first, so the target row speaks about the interface only.
  std::vector<std::size_t> above, internal, iface, constant;
  for (std::size_t c = 0; c < n; ++c) {
    if (c == target) continue;
    if (columns[c].constant) constant.push_back(c);
    else if (columns[c].rank > top) above.push_back(c);
    else if (!columns[c].interface) internal.push_back(c);
    else iface.push_back(c);
  }
  for (auto* v : {&above, &internal, &iface}) std::sort(v->begin(), v->end(), by_rank_desc);
  std::vector<std::size_t> preferring;
  for (auto* v : {&above, &internal}) preferring.insert(preferring.end(), v->begin(), v->end());
  preferring.push_back(target);
  preferring.insert(preferring.end(), iface.begin(), iface.end());
  preferring.insert(preferring.end(), constant.begin(), constant.end());

  // Interface-only: the part of the kernel that vanishes above the target
  // and on internal gates. With a thin kernel the pivots above run out
  // before they clear every internal column.
  std::vector<std::vector<Residue>> outer;
  if (!above.empty() || !internal.empty()) {
    ModMatrix m;
    for (const auto* v : {&above, &internal})
      for (std::size_t c : *v) {
        std::vector<Residue> row(kernel.size());
        for (std::size_t i = 0; i < kernel.size(); ++i) row[i] = kernel[i][c];
        m.push_back(std::move(row));
      }
    for (const auto& lambda : nullspace_mod_p(std::move(m), p)) {
      std::vector<Residue> v(n, 0);
      for (std::size_t i = 0; i < kernel.size(); ++i)
        for (std::size_t c = 0; c < n; ++c) v[c] = static_cast<Residue>((v[c] + std::uint64_t{lambda[i]} * kernel[i][c] % p) % p);
      outer.push_back(std::move(v));
    }
  }

  for (const auto* order : {&preferring, &standard}) {
    auto rel = pivot_row(kernel, *order, target, p);
    if (!rel) continue;
    // Nothing above the target may remain.
    bool ok = true;
    for (std::size_t c = 0; c < n; ++c)
      if (c != target && rel->coeffs[c] != 0 && !columns[c].constant && columns[c].rank > top) ok = false;
    if (!ok) continue;
    if (std::none_of(out.begin(), out.end(), [&](const CandidateRelation& r) { return r.coeffs == rel->coeffs; }))
      out.push_back(std::move(*rel));
  }
  if (!outer.empty())
    if (auto rel = pivot_row(outer, preferring, target, p);
        rel && std::none_of(out.begin(), out.end(), [&](const CandidateRelation& r) { return r.coeffs == rel->coeffs; }))
      out.push_back(std::move(*rel));
  auto internal_terms = [&](const CandidateRelation& r) {
    std::size_t k = 0;
    for (std::size_t c = 0; c < n; ++c) k += r.coeffs[c] != 0 && !columns[c].interface && !columns[c].constant && c != target;
    return k;
  };
  std::stable_sort(out.begin(), out.end(), [&](const CandidateRelation& a, const CandidateRelation& b) {
    const bool ia = internal_terms(a) == 0, ib = internal_terms(b) == 0;
    if (ia != ib) return ia;
    if (a.terms() != b.terms()) return a.terms() < b.terms();
    return a.max_magnitude() < b.max_magnitude();
  });
  return out;
}

GuessSystem::GuessSystem(std::span<const Sample> samples, std::vector<std::size_t> columns, std::uint64_t seed)
    : seed_(seed) {
  a_.columns = std::move(columns);
  a_.bits = BitMatrix(0, a_.columns.size() + 1);
  add_samples(samples);
  reproject();
}

bool GuessSystem::insert(const Sample& s) {
  auto row = a_.row_of(s);
  if (!seen_.emplace(row.begin(), row.end()).second) return false;
  a_.bits.append_row(row);
  return true;
}

void GuessSystem::add_samples(std::span<const Sample> samples) {
  for (const Sample& s : samples) insert(s);
}

void GuessSystem::reproject() {
  ++draws_;
  if (a_.rows() > a_.cols()) {
    proj_ = project(a_, derive_seed(seed_, draws_));
    return;
  }
  // Few distinct rows: select them all, so the kernel is exact.
  BitMatrix b(a_.cols(), a_.rows());
  for (std::size_t r = 0; r < a_.rows(); ++r) b.set(r, r, true);
  proj_ = project_with(a_, std::move(b));
}

bool GuessSystem::add_witness(const Sample& s) {
  auto row = a_.row_of(s);
  if (!insert(s)) return false;
  if (a_.rows() <= a_.cols() + 1)
    reproject();
  else
    fold_row(proj_, row, derive_seed(seed_, ++draws_));
  return true;
}

std::vector<std::vector<Residue>> GuessSystem::kernel(Residue p) const {
  return nullspace_mod_p(reduce_matrix(proj_, p), p);
}

std::vector<CandidateRelation> repair(GuessSystem& system, const Sample& witness,
                                      std::span<const ColumnInfo> columns, std::size_t target, Residue p) {
  system.add_witness(witness);
  return candidates(system.kernel(p), columns, target, p);
}

std::string dump_matrix(const SampleMatrix& a) {
  std::ostringstream os;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) os << (c ? " " : "") << a.bits.get(r, c);
    os << '\n';
  }
  return os.str();
}

std::string dump_matrix(const Projection& proj) {
  std::ostringstream os;
  for (std::size_t i = 0; i < proj.n; ++i) {
    for (std::size_t j = 0; j < proj.n; ++j) os << (j ? " " : "") << proj.at(i, j);
    os << '\n';
  }
  return os.str();
}

}  // namespace mmv
