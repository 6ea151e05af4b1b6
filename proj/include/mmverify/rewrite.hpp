#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmverify/aig.hpp"
#include "mmverify/encoding.hpp"
#include "mmverify/guess.hpp"
#include "mmverify/prove.hpp"
#include "mmverify/sampler.hpp"

namespace mmv {

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Provenance { Preprocessing, GuessProve };

/// Proven linear relations keyed by their leading variable.
class RelationCache {
 public:
  struct Entry {
    MmPoly relation;
    Provenance provenance;
  };

  void add(MmPoly relation, Provenance provenance);
  const Entry* find(Var leading) const;
  std::size_t size() const { return count_; }
  std::size_t count(Provenance p) const;
  const std::map<Var, std::vector<Entry>>& entries() const { return by_var_; }

 private:
  std::map<Var, std::vector<Entry>> by_var_;
  std::size_t count_ = 0;
};

/// 2c + s - Σ inputs for every detected adder, literal polarities included.
RelationCache preprocess_relations(const CircuitEncoding& enc, const std::vector<AdderInstance>& adders);

struct DepthSchedule {
  unsigned initial = 4;
  unsigned increment = 4;
  unsigned max_escalations = 3;
};

struct LinearConfig {
  DepthSchedule depth;
  SamplerKind sampler = SamplerKind::Weighted;
  unsigned sample_factor = 3;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  ProveOptions prove;
  unsigned max_repairs = 16;
  unsigned max_resamples = 2;
  unsigned reproject_after = 2;  // refuted repair rounds between fresh projections
};

struct PhaseTime {
  double seconds = 0;
  bool entered = false;
  void add(double s) {
    seconds += s;
    entered = true;
  }
};

struct RunStats {
  PhaseTime preprocess, extract, sample, guess, prove, repair, linear_rewrite, simplify, nonlinear_rewrite;
  std::vector<double> lane_guess, lane_prove, lane_repair;  // per prime

  std::size_t preprocessing_relations = 0;
  std::size_t guess_rounds = 0;      // subcircuits sent to guess-and-prove
  std::size_t relations_learned = 0;
  std::size_t candidates_tried = 0;
  std::size_t prove_calls = 0;
  std::size_t sat_calls = 0;
  std::size_t excluded = 0;
  std::size_t discarded = 0;
  std::size_t repair_rounds = 0;
  std::size_t reprojections = 0;
  std::size_t resamples = 0;
  std::size_t escalations = 0;
  std::size_t failed_extractions = 0;
  std::size_t linear_steps = 0;
  std::size_t nonlinear_steps = 0;
  std::size_t eliminated_gates = 0;
  std::size_t max_terms = 0;
  bool switched = false;
  bool simulated_witness = false;  // nonlinear swell cut short by a simulated counterexample
  std::string switch_reason;

  explicit RunStats(std::size_t lanes = 0) : lane_guess(lanes, 0), lane_prove(lanes, 0), lane_repair(lanes, 0) {}
};

/// Extension variables whose monomial lies in the subcircuit, as product-valued columns.
std::vector<AttachedVar> attach_extension_vars(const Subcircuit& sc, const CircuitEncoding& enc);

/// Sample, guess, prove and repair on one subcircuit. Returns a relation with
/// leading variable `target`, proven in every prime lane.
std::optional<MmPoly> guess_and_prove(const Subcircuit& sc, NodeId target, const Aig& aig, const CircuitEncoding& enc,
                                      const LinearConfig& config, RunStats& stats, std::uint64_t round);

struct LinearOutcome {
  bool verified = false;
  MmPoly spec;
  std::string reason;  // why the phase stopped without reaching zero
};

/// Rewrites a linear spec by cached and freshly proven relations.
LinearOutcome linear_phase(MmPoly spec, const Aig& aig, const CircuitEncoding& enc, const FsaApproximation& fsa,
                           RelationCache& cache, const LinearConfig& config, RunStats& stats);

/// Gate polynomials after substituting single-fanout gates into their parent.
struct SimplifiedEncoding {
  CircuitEncoding enc;                  // gate_polys: g - expanded tail
  std::vector<std::uint8_t> eliminated; // by gate position
};
SimplifiedEncoding simplify_encoding(const CircuitEncoding& enc, const Aig& aig,
                                     std::size_t term_limit = 10'000'000);

/// Remainder modulo the gate polynomials under the reverse-topological lex
/// order, with Boolean reduction. Extension variables are substituted back first.
MmPoly nonlinear_normal_form(const MmPoly& spec, const CircuitEncoding& enc, const Aig& aig,
                             RunStats* stats = nullptr, std::size_t term_limit = 10'000'000);

/// Input assignment (by input position) on which `nf` is nonzero in some lane.
/// Throws EncodingError when nf is zero or mentions a non-input variable.
std::vector<std::uint8_t> extract_counterexample(const MmPoly& nf, const CircuitEncoding& enc, const Aig& aig,
                                                 std::uint64_t seed = 1);

/// Searches random input patterns for one where `f` (over inputs, extension
/// and gate variables) is nonzero on the simulated circuit. Every rewrite keeps
/// the value of f on circuit behaviors, so such a pattern violates the spec.
std::optional<std::vector<std::uint8_t>> simulated_witness(const MmPoly& f, const CircuitEncoding& enc,
                                                           const Aig& aig, std::uint64_t seed = 1,
                                                           unsigned batches = 256);

}  // namespace mmv
