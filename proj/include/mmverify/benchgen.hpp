#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmverify/aig.hpp"

namespace mmv {

/// Structurally hashed AIG construction with constant folding.
class AigBuilder {
 public:
  Literal input(std::string name);
  void output(Literal lit, std::string name);

  Literal and_(Literal a, Literal b);
  Literal or_(Literal a, Literal b) { return !and_(!a, !b); }
  Literal xor_(Literal a, Literal b);
  /// Returns (sum, carry).
  std::pair<Literal, Literal> half_adder(Literal a, Literal b);
  std::pair<Literal, Literal> full_adder(Literal a, Literal b, Literal c);

  const Aig& aig() const { return aig_; }
  Aig take() { return std::move(aig_); }

 private:
  Aig aig_;
  std::unordered_map<std::uint64_t, Literal> strash_;
};

enum class FsaKind { RippleCarry, CarryLookahead };
enum class FaultKind { FlipPolarity, SwapChildren, ConstantGate };

struct Fault {
  FaultKind kind;
  std::uint64_t seed;
};

struct GenSpec {
  unsigned n_bits = 4;
  FsaKind fsa = FsaKind::RippleCarry;
  bool is_signed = false;
  std::optional<Fault> fault;
  /// When nonzero, one partial product of weight n is split off through an AND
  /// chain of this depth whose output enters the final adder as carry-in.
  unsigned and_chain = 0;
};

struct GeneratedCircuit {
  Aig aig;
  std::vector<NodeId> pp_gates;   // partial-product AND gates
  std::vector<NodeId> fsa_gates;  // gates built for the final-stage adder
  std::vector<NodeId> chain_gates;
};

/// Simple partial products, array accumulation, ripple-carry or lookahead final adder.
GeneratedCircuit build_multiplier(const GenSpec& spec);
/// AIGER text of build_multiplier(spec), with the fault applied when requested.
std::string gen_multiplier(const GenSpec& spec);

/// n-bit ripple-carry adder: inputs a0.., b0.., outputs s0..sn.
Aig build_adder(unsigned n);

FaultKind parse_fault_kind(const std::string& name);
std::string fault_kind_name(FaultKind kind);

/// One local mutation, re-rolled until some output changes on some input pattern.
Aig inject_fault(const Aig& aig, const Fault& fault);

/// True when both circuits compute the same outputs on every pattern
/// (exhaustive up to 20 inputs, otherwise `random_words` random 64-pattern batches).
bool outputs_equivalent(const Aig& a, const Aig& b, std::uint64_t seed = 1, unsigned random_words = 64);

}  // namespace mmv
