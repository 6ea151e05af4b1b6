#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "mmverify/algebra.hpp"
#include "mmverify/sampler.hpp"

namespace mmv {

class GuessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major bit matrix.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words() const { return words_; }
  bool get(std::size_t r, std::size_t c) const { return (row(r)[c / 64] >> (c % 64)) & 1u; }
  void set(std::size_t r, std::size_t c, bool v);
  std::span<const std::uint64_t> row(std::size_t r) const { return {bits_.data() + r * words_, words_}; }
  void append_row(std::span<const std::uint8_t> values);
  BitMatrix transposed() const;

 private:
  std::size_t rows_ = 0, cols_ = 0, words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Sample rows over chosen columns plus a trailing all-ones column.
struct SampleMatrix {
  std::vector<std::size_t> columns;  // sample columns, in matrix order
  BitMatrix bits;

  std::size_t rows() const { return bits.rows(); }
  std::size_t cols() const { return bits.cols(); }
  std::size_t constant_column() const { return cols() - 1; }
  /// Matrix row of a sample (selected columns, then 1).
  std::vector<std::uint8_t> row_of(const Sample& s) const;
  void append(const Sample& s);
  bool contains_row(const Sample& s) const;
};

/// Throws GuessError when a sample lacks one of the columns.
SampleMatrix build_matrix(std::span<const Sample> samples, std::span<const std::size_t> columns);

/// BA for a random {0,1} matrix B with cols(A) rows, kept as exact counts.
struct Projection {
  BitMatrix b;                       // cols(A) x rows(A)
  std::vector<std::uint32_t> ba;     // cols(A) x cols(A), row-major
  std::size_t n = 0;

  std::uint32_t at(std::size_t i, std::size_t j) const { return ba[i * n + j]; }
};

/// Throws GuessError when rows(A) < cols(A).
Projection project(const SampleMatrix& a, std::uint64_t seed);
/// BA for a given B (test hook); B must have rows(A) columns.
Projection project_with(const SampleMatrix& a, BitMatrix b);
/// Appends one row to A's projection: B gains a random column and BA a rank-one term.
void fold_row(Projection& proj, std::span<const std::uint8_t> row, std::uint64_t seed);

using ModMatrix = std::vector<std::vector<Residue>>;

ModMatrix reduce_matrix(const Projection& proj, Residue p);
/// Reduced row echelon form in place, pivots at the lowest available column.
/// Returns pivot columns.
std::vector<std::size_t> rref_mod_p(ModMatrix& m, Residue p);
/// Basis of {x : M x = 0}, one vector per free column, ascending.
std::vector<std::vector<Residue>> nullspace_mod_p(ModMatrix m, Residue p);

/// How a matrix column takes part in candidate selection.
struct ColumnInfo {
  std::uint32_t rank = 0;  // variable order; the constant ranks lowest
  bool interface = false;  // boundary input, root or extension variable
  bool constant = false;
};

struct CandidateRelation {
  std::vector<Residue> coeffs;  // by matrix column
  std::size_t leading = 0;      // matrix column of the leading variable
  Residue p = 0;

  std::size_t terms() const;
  std::uint64_t max_magnitude() const;
};

/// Relations in the span of `kernel` whose leading variable is `target`,
/// normalized to leading coefficient 1, fewest terms first.
std::vector<CandidateRelation> candidates(const std::vector<std::vector<Residue>>& kernel,
                                          std::span<const ColumnInfo> columns, std::size_t target, Residue p);

/// Distinct sample rows with their prime-independent projection.
class GuessSystem {
 public:
  GuessSystem(std::span<const Sample> samples, std::vector<std::size_t> columns, std::uint64_t seed);

  const SampleMatrix& matrix() const { return a_; }
  const Projection& projection() const { return proj_; }

  void add_samples(std::span<const Sample> samples);
  /// Fresh B over all rows.
  void reproject();
  /// Folds a new row into the current projection; false when it is already a row.
  bool add_witness(const Sample& s);

  std::vector<std::vector<Residue>> kernel(Residue p) const;

 private:
  bool insert(const Sample& s);

  SampleMatrix a_;
  std::unordered_set<std::string> seen_;
  Projection proj_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

/// Appends the witness and re-solves; candidates unchanged when the witness is already a row.
std::vector<CandidateRelation> repair(GuessSystem& system, const Sample& witness,
                                      std::span<const ColumnInfo> columns, std::size_t target, Residue p);

/// Plain-text dump: one line per row, entries separated by spaces.
std::string dump_matrix(const SampleMatrix& a);
std::string dump_matrix(const Projection& proj);

}  // namespace mmv
