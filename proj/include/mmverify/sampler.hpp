#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmverify/aig.hpp"
#include "mmverify/algebra.hpp"

namespace mmv {

/// Extension variable valued as the product of circuit nodes.
struct AttachedVar {
  Var var;
  std::vector<NodeId> factors;
};

/// Columns of a sampled subcircuit: boundary inputs, then gates
/// (topological), then attached extension variables.
class SampleSpace {
 public:
  SampleSpace(const Aig& aig, Subcircuit sc, std::vector<AttachedVar> attached = {});

  const Aig& aig() const { return *aig_; }
  const Subcircuit& subcircuit() const { return sc_; }
  std::span<const AttachedVar> attached() const { return attached_; }

  std::size_t columns() const { return sc_.boundary_inputs.size() + sc_.nodes.size() + attached_.size(); }
  std::size_t num_boundary() const { return sc_.boundary_inputs.size(); }
  std::size_t first_gate_column() const { return sc_.boundary_inputs.size(); }
  std::size_t first_attached_column() const { return sc_.boundary_inputs.size() + sc_.nodes.size(); }

  /// Column holding a boundary input or gate of the subcircuit.
  std::optional<std::size_t> column(NodeId id) const;
  /// Node of a boundary or gate column.
  NodeId node_at(std::size_t column) const;

  /// Column of a literal's node, or nullopt for the constant node.
  struct Operand {
    std::int64_t column;  // -1: constant false
    bool negated;
  };
  Operand operand(Literal lit) const;

 private:
  const Aig* aig_;
  Subcircuit sc_;
  std::vector<AttachedVar> attached_;
  std::vector<std::int64_t> column_of_;  // by node id, -1 when absent
};

/// One value per column of the space.
struct Sample {
  std::vector<std::uint8_t> values;
  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class SamplerKind { Weighted, Uniform };

/// Forward simulation from boundary values (one per boundary input).
Sample complete_sample(const SampleSpace& space, std::span<const std::uint8_t> boundary);
/// Every gate equation and every attached product holds.
bool is_model(const SampleSpace& space, const Sample& s);

std::size_t default_sample_count(const Subcircuit& sc, unsigned factor = 3);

/// `count` models. Sample i depends only on (seed, i), so the result does not
/// depend on `threads`.
std::vector<Sample> sample_models(const SampleSpace& space, std::size_t count, std::uint64_t seed,
                                  SamplerKind kind, unsigned threads = 1);

/// Mixes a seed with a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mmv
