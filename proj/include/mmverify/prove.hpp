#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmverify/guess.hpp"
#include "mmverify/sampler.hpp"
#include "mmverify/sat.hpp"

namespace mmv {

class ProveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer linear form over the columns of a sample space.
struct LinearForm {
  std::vector<std::pair<std::size_t, std::int64_t>> terms;  // (column, coefficient), nonzero
  std::int64_t constant = 0;

  std::int64_t evaluate(const Sample& s) const;
  std::uint64_t weight() const;  // Σ|c| + |c0|
};

/// Symmetric lift of a mod-p relation, scaled by the unit λ that minimizes
/// the total coefficient magnitude. Matrix column j maps to sample column `columns[j]`;
/// the last matrix column is the constant.
LinearForm lift_relation(const CandidateRelation& rel, std::span<const std::size_t> columns);

struct CnfEncoding {
  sat::Cnf cnf;
  std::vector<int> column_var;  // CNF variable of each sample column
};

/// Tseitin clauses of the subcircuit and attached products, plus an adder
/// network asserting value(f) != 0.
CnfEncoding encode_cnf(const SampleSpace& space, const LinearForm& f);
Sample decode_model(const SampleSpace& space, const CnfEncoding& enc, const sat::Result& r);

enum class Backend { Auto, Exhaustive, Cdcl, External };

struct ProveOptions {
  Backend backend = Backend::Auto;
  std::string solver_path;        // for Backend::External
  double timeout_sec = 0;         // external solver, per call
  unsigned exclusion_cap = 32;
  unsigned exhaustive_limit = 20; // boundary inputs permitted for enumeration
  unsigned auto_exhaustive = 14;  // Auto enumerates up to this many boundary inputs
  std::string keep_cnf_dir;       // keep DIMACS files here when nonempty
};

struct ProofOutcome {
  enum class Verdict { Proven, Refuted, Discarded };
  Verdict verdict = Verdict::Discarded;
  std::optional<Sample> witness;
  std::size_t sat_calls = 0;
  std::size_t excluded_count = 0;
  std::string note;  // why a candidate was discarded
};

/// Solve, exclude assignments whose value is a nonzero multiple of p, repeat.
ProofOutcome prove_relation(const SampleSpace& space, const LinearForm& f, Residue p, const ProveOptions& options = {});

}  // namespace mmv
