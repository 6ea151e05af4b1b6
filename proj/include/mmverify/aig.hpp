#pragma once

#include <cstdint>
#include <compare>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmv {

using NodeId = std::uint32_t;

/// Edge into a node, possibly inverted. Node 0 is the constant-false node.
struct Literal {
  NodeId node = 0;
  bool negated = false;

  static Literal from_aiger(std::uint32_t lit) { return {lit >> 1, (lit & 1) != 0}; }
  std::uint32_t aiger() const { return 2 * node + (negated ? 1 : 0); }
  Literal operator!() const { return {node, !negated}; }
  bool is_constant() const { return node == 0; }

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal& a, const Literal& b) { return a.aiger() <=> b.aiger(); }
};

inline constexpr Literal kFalse{0, false};
inline constexpr Literal kTrue{0, true};

struct Gate {
  NodeId id;
  Literal left;
  Literal right;
};

enum class NodeKind : std::uint8_t { Constant, Input, Gate, Unused };

class AigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Combinational And-Inverter Graph. Node ids are AIGER variable indices.
/// Gates are kept in a topological order (children before parents).
class Aig {
 public:
  Aig();

  /// Validates references, sorts gates topologically and rejects cycles.
  /// Throws AigError naming a gate on the cycle.
  static Aig from_parts(NodeId max_var, std::vector<NodeId> inputs, std::vector<Gate> gates,
                        std::vector<Literal> outputs, std::vector<std::string> input_names = {},
                        std::vector<std::string> output_names = {});

  // Incremental construction (node ids are assigned consecutively).
  NodeId add_input(std::string name = {});
  /// Appends a gate; both children must already exist.
  Literal add_gate(Literal left, Literal right);
  void add_output(Literal lit, std::string name = {});

  std::size_t num_nodes() const { return kinds_.size(); }
  NodeId max_var() const { return static_cast<NodeId>(kinds_.size() - 1); }
  std::size_t num_inputs() const { return inputs_.size(); }
  std::size_t num_gates() const { return gates_.size(); }
  std::size_t num_outputs() const { return outputs_.size(); }

  std::span<const NodeId> inputs() const { return inputs_; }
  std::span<const Gate> gates() const { return gates_; }
  std::span<const Literal> outputs() const { return outputs_; }

  NodeKind kind(NodeId id) const { return kinds_.at(id); }
  bool is_gate(NodeId id) const { return id < kinds_.size() && kinds_[id] == NodeKind::Gate; }
  bool is_input(NodeId id) const { return id < kinds_.size() && kinds_[id] == NodeKind::Input; }
  const Gate& gate(NodeId id) const { return gates_[index_.at(id)]; }
  /// Position of a gate in topological order, or of an input in input order.
  std::uint32_t index(NodeId id) const { return index_.at(id); }

  const std::string& input_name(std::size_t i) const { return input_names_.at(i); }
  const std::string& output_name(std::size_t i) const { return output_names_.at(i); }
  void set_input_name(std::size_t i, std::string name) { input_names_.at(i) = std::move(name); }
  void set_output_name(std::size_t i, std::string name) { output_names_.at(i) = std::move(name); }
  bool has_symbols() const;

  /// Gate parents of each node (one entry per referencing edge).
  const std::vector<std::vector<NodeId>>& fanouts() const { return fanouts_; }
  /// Number of output pins referencing each node.
  const std::vector<std::uint32_t>& output_refs() const { return output_refs_; }

  /// Node values for one input assignment (by input position).
  std::vector<std::uint8_t> simulate(std::span<const std::uint8_t> input_values) const;
  /// 64 assignments at once; word i belongs to input i.
  std::vector<std::uint64_t> simulate_words(std::span<const std::uint64_t> input_words) const;
  static bool literal_value(std::span<const std::uint8_t> values, Literal lit) {
    return (values[lit.node] != 0) != lit.negated;
  }
  static std::uint64_t literal_word(std::span<const std::uint64_t> values, Literal lit) {
    return lit.negated ? ~values[lit.node] : values[lit.node];
  }

  /// Copy with the children of gate `id` replaced. The new children must
  /// precede the gate topologically.
  Aig with_gate(NodeId id, Literal left, Literal right) const;

  friend bool operator==(const Aig& a, const Aig& b);

 private:
  void rebuild_fanouts();

  std::vector<NodeKind> kinds_;
  std::vector<std::uint32_t> index_;
  std::vector<NodeId> inputs_;
  std::vector<Gate> gates_;
  std::vector<Literal> outputs_;
  std::vector<std::string> input_names_;
  std::vector<std::string> output_names_;
  std::vector<std::vector<NodeId>> fanouts_;
  std::vector<std::uint32_t> output_refs_;
};

// ---------------------------------------------------------------------------
// AIGER I/O

class ParseError : public AigError {
 public:
  enum class Kind { MalformedHeader, LiteralOutOfRange, UndefinedLiteral, Cycle, Truncated, Unsupported, Malformed };
  ParseError(Kind kind, std::size_t line, const std::string& what);
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// Accepts ASCII ("aag") and binary ("aig") AIGER.
Aig parse_aiger(std::string_view text);
Aig read_aiger_file(const std::string& path);
/// ASCII AIGER with symbol table entries for named pins.
std::string write_aag(const Aig& aig);

// ---------------------------------------------------------------------------
// Structural analysis

/// rank(v) for every node: constant < inputs < gates, gates above their fanins.
/// Output pins rank above every node, increasing with output position.
struct Ranking {
  std::vector<std::uint32_t> node_rank;
  std::vector<std::uint32_t> output_rank;
};
Ranking reverse_topological_ranking(const Aig& aig);

struct Cut {
  NodeId root;
  std::vector<NodeId> leaves;  // ascending
  std::uint8_t truth_table;    // row b: leaf i takes bit i of b
};

std::vector<std::vector<Cut>> enumerate_cuts(const Aig& aig, unsigned max_leaves = 3,
                                             std::size_t max_cuts = 16);

struct AdderInstance {
  enum class Kind { HA, FA };
  Kind kind;
  std::vector<Literal> inputs;
  Literal sum;
  Literal carry;
};

/// Semantic half/full adder detection on 2- and 3-leaf cuts.
std::vector<AdderInstance> detect_adders(const Aig& aig, const std::vector<std::vector<Cut>>& cuts);

/// Closed node set with free boundary inputs.
struct Subcircuit {
  std::vector<NodeId> nodes;            // gates, topological order
  std::vector<NodeId> boundary_inputs;  // ascending
  std::vector<NodeId> roots;            // topological order

  bool contains(NodeId id) const;
  std::size_t size() const { return nodes.size() + boundary_inputs.size(); }
};

struct FsaApproximation {
  Subcircuit region;
  /// Output positions whose backward traversal meets no adder cell.
  std::vector<std::size_t> bypassing_outputs;
  bool whole_circuit = false;
};

FsaApproximation approximate_fsa(const Aig& aig, const std::vector<AdderInstance>& adders);

/// Depth-bounded fanin cone of `root` plus closure. Throws AigError if root is not a gate.
Subcircuit extract_subcircuit(const Aig& aig, NodeId root, unsigned depth);

/// Builds a Subcircuit from an arbitrary gate set: applies the closure rule,
/// derives the boundary and the roots (`extra_roots` are always roots).
Subcircuit close_subcircuit(const Aig& aig, std::vector<NodeId> gates, std::span<const NodeId> extra_roots = {});

/// Checks both Subcircuit invariants by direct scan.
bool is_valid_subcircuit(const Aig& aig, const Subcircuit& sc);

}  // namespace mmv
