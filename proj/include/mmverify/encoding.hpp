#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmverify/aig.hpp"
#include "mmverify/algebra.hpp"
#include "mmverify/poly_text.hpp"

namespace mmv {

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Circuit-level symbol in an exact specification.
struct Symbol {
  enum class Kind : std::uint8_t { Input, Output, Node };
  Kind kind;
  std::uint32_t index;  // input position, output position or node id
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

/// Multilinear term with an exact coefficient.
struct ExactTerm {
  BigInt coeff;
  std::vector<Symbol> factors;  // sorted, no repeats
};

/// Evaluates exact terms on a simulated circuit (node values from Aig::simulate).
BigInt evaluate_exact(const std::vector<ExactTerm>& terms, const Aig& aig, std::span<const std::uint8_t> node_values);

/// Positions of the multiplier operands and result bits among the circuit pins.
struct PinMap {
  std::vector<std::size_t> a, b;  // input positions of a_i, b_i
  std::vector<std::size_t> s;     // output positions of s_i
  std::string how;                // "symbols", "sequential" or "interleaved"
};

/// `order` is "auto", "sequential" or "interleaved". Auto uses aN/bN/sN symbol
/// names when complete, otherwise sequential order.
PinMap detect_pins(const Aig& aig, unsigned n, const std::string& order = "auto");

enum class SpecMode { Unsigned, Signed, Custom };

/// Variable ids of the polynomial ring. The id order is the reverse-topological
/// ranking: inputs < extension variables < gates (topological) < outputs.
class VarLayout {
 public:
  VarLayout() = default;
  VarLayout(const Aig& aig, std::size_t num_extensions);

  Var node_var(NodeId id) const { return node_var_.at(id); }
  Var output_var(std::size_t o) const { return first_output_ + static_cast<Var>(o); }
  Var ext_var(std::size_t k) const { return first_ext_ + static_cast<Var>(k); }
  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_extensions() const { return first_gate_ - first_ext_; }

  bool is_input_var(Var v) const { return v >= 1 && v < first_ext_; }
  bool is_ext_var(Var v) const { return v >= first_ext_ && v < first_gate_; }
  bool is_gate_var(Var v) const { return v >= first_gate_ && v < first_output_; }
  bool is_output_var(Var v) const { return v >= first_output_ && v < num_vars_; }
  /// Node id of an input or gate variable.
  NodeId node_of(Var v) const { return var_node_.at(v); }
  std::size_t ext_index(Var v) const { return v - first_ext_; }
  std::size_t output_index(Var v) const { return v - first_output_; }

  std::vector<std::uint32_t> ranks() const;

 private:
  std::vector<Var> node_var_;
  std::vector<NodeId> var_node_;
  Var first_ext_ = 1, first_gate_ = 1, first_output_ = 1;
  std::size_t num_vars_ = 1;
};

struct ExtensionVar {
  Var var;
  Monomial monomial;  // degree > 1
  MmPoly poly;        // var - monomial
};

struct CircuitEncoding {
  RingPtr ring;
  VarLayout layout;
  std::vector<MmPoly> gate_polys;    // by topological gate position
  std::vector<MmPoly> output_polys;  // s_i - literal
  std::vector<MmPoly> boolean_polys;
  std::vector<ExtensionVar> extensions;

  const MmPoly& gate_poly(const Aig& aig, NodeId id) const { return gate_polys[aig.index(id)]; }
  std::string var_name(const Aig& aig, Var v) const;
};

struct SpecTask {
  SpecMode mode = SpecMode::Unsigned;
  unsigned n_bits = 0;
  BigInt bound;
  PinMap pins;
  /// Exact specification over circuit symbols (outputs as output pins).
  std::vector<ExactTerm> exact;
  std::optional<MmPoly> original_spec;  // over output and input variables
  std::optional<MmPoly> spec;           // output literals folded, linearized
};

/// Σ 2^i s_i - (Σ α_i a_i)(Σ β_j b_j), signed mode negating the MSB weights.
std::vector<ExactTerm> multiplier_terms(unsigned n, SpecMode mode, const PinMap& pins);
/// Resolves names against pin symbols, "aN"/"bN"/"sN" (with `pins`), "iK", "oK" and "nID".
std::vector<ExactTerm> custom_terms(const std::vector<NamedTerm>& terms, const Aig& aig, const PinMap* pins);
/// max |φ(S)| is at most the sum of absolute coefficients.
BigInt coefficient_bound(const std::vector<ExactTerm>& terms);

/// Minimal count of primes above 2^prime_bits whose product exceeds the bound.
PrimeBasis choose_primes(const BigInt& bound, unsigned prime_bits = 16);

/// Literal as a polynomial: x, 1 - x, or a constant.
MmPoly literal_poly(const RingPtr& ring, const VarLayout& layout, Literal lit);
/// g - L(left) L(right), Boolean-reduced.
MmPoly gate_polynomial(const RingPtr& ring, const VarLayout& layout, const Gate& gate);
std::vector<MmPoly> boolean_polys(const RingPtr& ring, std::span<const Var> inputs);

/// Replaces every monomial of degree > 1 by a variable from `allocate`.
struct Linearized {
  MmPoly spec;
  std::vector<ExtensionVar> extensions;
};
Linearized linearize(const MmPoly& spec, const std::function<Var(const Monomial&)>& allocate);
/// Substitutes the monomials back for the extension variables.
MmPoly delinearize(const MmPoly& spec, const std::vector<ExtensionVar>& extensions);

struct SpecOptions {
  SpecMode mode = SpecMode::Unsigned;
  std::string pin_order = "auto";
  std::string custom_text;  // for SpecMode::Custom
  unsigned prime_bits = 16;
};

struct Problem {
  CircuitEncoding enc;
  SpecTask task;
};

/// Full encoding: exact spec, prime basis, variable layout, G(C), B(C), E(C).
Problem build_problem(const Aig& aig, const SpecOptions& options);

/// Checks a circuit assignment against the original specification exactly.
bool violates_spec(const Problem& p, const Aig& aig, std::span<const std::uint8_t> inputs);

}  // namespace mmv
