#include "mmverify/aig.hpp"

#include <algorithm>
#include <queue>

namespace mmv {

namespace {

constexpr std::uint32_t kNoIndex = ~std::uint32_t{0};

}  // namespace

Aig::Aig() : kinds_{NodeKind::Constant}, index_{kNoIndex}, fanouts_(1), output_refs_(1, 0) {}

bool Aig::has_symbols() const {
  auto named = [](const std::string& s) { return !s.empty(); };
  return std::any_of(input_names_.begin(), input_names_.end(), named) ||
         std::any_of(output_names_.begin(), output_names_.end(), named);
}

NodeId Aig::add_input(std::string name) {
  NodeId id = static_cast<NodeId>(kinds_.size());
  kinds_.push_back(NodeKind::Input);
  index_.push_back(static_cast<std::uint32_t>(inputs_.size()));
  inputs_.push_back(id);
  input_names_.push_back(std::move(name));
  fanouts_.emplace_back();
  output_refs_.push_back(0);
  return id;
}

Literal Aig::add_gate(Literal left, Literal right) {
  NodeId id = static_cast<NodeId>(kinds_.size());
  for (Literal l : {left, right}) {
    if (l.node >= id || kinds_[l.node] == NodeKind::Unused) throw AigError("gate child is not defined yet");
  }
  kinds_.push_back(NodeKind::Gate);
  index_.push_back(static_cast<std::uint32_t>(gates_.size()));
  gates_.push_back({id, left, right});
  fanouts_.emplace_back();
  output_refs_.push_back(0);
  fanouts_[left.node].push_back(id);
  fanouts_[right.node].push_back(id);
  return {id, false};
}

void Aig::add_output(Literal lit, std::string name) {
  if (lit.node >= kinds_.size() || kinds_[lit.node] == NodeKind::Unused)
    throw AigError("output references an undefined node");
  outputs_.push_back(lit);
  output_names_.push_back(std::move(name));
  ++output_refs_[lit.node];
}

Aig Aig::from_parts(NodeId max_var, std::vector<NodeId> inputs, std::vector<Gate> gates,
                    std::vector<Literal> outputs, std::vector<std::string> input_names,
                    std::vector<std::string> output_names) {
  Aig aig;
  aig.kinds_.assign(std::size_t{max_var} + 1, NodeKind::Unused);
  aig.kinds_[0] = NodeKind::Constant;
  aig.index_.assign(std::size_t{max_var} + 1, kNoIndex);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    NodeId id = inputs[i];
    if (id == 0 || id > max_var || aig.kinds_[id] != NodeKind::Unused)
      throw AigError("invalid or repeated input id " + std::to_string(id));
    aig.kinds_[id] = NodeKind::Input;
    aig.index_[id] = static_cast<std::uint32_t>(i);
  }
  std::vector<std::uint32_t> position(std::size_t{max_var} + 1, kNoIndex);
  for (std::size_t i = 0; i < gates.size(); ++i) {
    NodeId id = gates[i].id;
    if (id == 0 || id > max_var || aig.kinds_[id] != NodeKind::Unused)
      throw AigError("invalid or repeated gate id " + std::to_string(id));
    aig.kinds_[id] = NodeKind::Gate;
    position[id] = static_cast<std::uint32_t>(i);
  }
  auto check = [&](Literal l) {
    if (l.node > max_var || aig.kinds_[l.node] == NodeKind::Unused)
      throw AigError("literal " + std::to_string(l.aiger()) + " references an undefined node");
  };
  for (const Gate& g : gates) {
    check(g.left);
    check(g.right);
  }
  for (Literal l : outputs) check(l);

  // Kahn's algorithm; among ready gates the smallest id goes first.
  std::vector<std::uint32_t> pending(gates.size(), 0);
  std::vector<std::vector<std::uint32_t>> parents(gates.size());
  for (std::size_t i = 0; i < gates.size(); ++i) {
    for (Literal l : {gates[i].left, gates[i].right}) {
      if (aig.kinds_[l.node] == NodeKind::Gate) {
        ++pending[i];
        parents[position[l.node]].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  std::priority_queue<std::pair<NodeId, std::uint32_t>, std::vector<std::pair<NodeId, std::uint32_t>>,
                      std::greater<>>
      ready;
  for (std::size_t i = 0; i < gates.size(); ++i)
    if (pending[i] == 0) ready.emplace(gates[i].id, static_cast<std::uint32_t>(i));
  while (!ready.empty()) {
    auto [id, i] = ready.top();
    ready.pop();
    aig.index_[id] = static_cast<std::uint32_t>(aig.gates_.size());
    aig.gates_.push_back(gates[i]);
    for (std::uint32_t p : parents[i])
      if (--pending[p] == 0) ready.emplace(gates[p].id, p);
  }
  if (aig.gates_.size() != gates.size()) {
    for (std::size_t i = 0; i < gates.size(); ++i)
      if (pending[i] > 0) throw AigError("cyclic definition at gate " + std::to_string(gates[i].id));
  }

  aig.inputs_ = std::move(inputs);
  aig.outputs_ = std::move(outputs);
  input_names.resize(aig.inputs_.size());
  output_names.resize(aig.outputs_.size());
  aig.input_names_ = std::move(input_names);
  aig.output_names_ = std::move(output_names);
  aig.rebuild_fanouts();
  return aig;
}

void Aig::rebuild_fanouts() {
  fanouts_.assign(kinds_.size(), {});
  output_refs_.assign(kinds_.size(), 0);
  for (const Gate& g : gates_) {
    fanouts_[g.left.node].push_back(g.id);
    fanouts_[g.right.node].push_back(g.id);
  }
  for (Literal l : outputs_) ++output_refs_[l.node];
}

std::vector<std::uint8_t> Aig::simulate(std::span<const std::uint8_t> input_values) const {
  if (input_values.size() != inputs_.size()) throw AigError("assignment size does not match the input count");
  std::vector<std::uint8_t> v(kinds_.size(), 0);
  for (std::size_t i = 0; i < inputs_.size(); ++i) v[inputs_[i]] = input_values[i] ? 1 : 0;
  for (const Gate& g : gates_) v[g.id] = literal_value(v, g.left) && literal_value(v, g.right);
  return v;
}

std::vector<std::uint64_t> Aig::simulate_words(std::span<const std::uint64_t> input_words) const {
  if (input_words.size() != inputs_.size()) throw AigError("assignment size does not match the input count");
  std::vector<std::uint64_t> v(kinds_.size(), 0);
  for (std::size_t i = 0; i < inputs_.size(); ++i) v[inputs_[i]] = input_words[i];
  for (const Gate& g : gates_) v[g.id] = literal_word(v, g.left) & literal_word(v, g.right);
  return v;
}

Aig Aig::with_gate(NodeId id, Literal left, Literal right) const {
  if (!is_gate(id)) throw AigError("node " + std::to_string(id) + " is not a gate");
  std::vector<Gate> gates(gates_.begin(), gates_.end());
  gates[index_[id]] = {id, left, right};
  return from_parts(max_var(), inputs_, std::move(gates), outputs_, input_names_, output_names_);
}

bool operator==(const Aig& a, const Aig& b) {
  if (a.kinds_ != b.kinds_ || a.inputs_ != b.inputs_ || a.outputs_ != b.outputs_) return false;
  if (a.gates_.size() != b.gates_.size()) return false;
  for (std::size_t i = 0; i < a.gates_.size(); ++i) {
    const Gate& x = a.gates_[i];
    const Gate& y = b.gates_[i];
    if (x.id != y.id || x.left != y.left || x.right != y.right) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Ranking reverse_topological_ranking(const Aig& aig) {
  Ranking r;
  r.node_rank.assign(aig.num_nodes(), 0);
  std::uint32_t next = 1;
  // Unused ids get ranks too so the map is total; they sit just above the constant.
  for (NodeId id = 1; id < aig.num_nodes(); ++id)
    if (aig.kind(id) == NodeKind::Unused) r.node_rank[id] = next++;
  std::vector<NodeId> inputs(aig.inputs().begin(), aig.inputs().end());
  std::sort(inputs.begin(), inputs.end());
  for (NodeId id : inputs) r.node_rank[id] = next++;
  for (const Gate& g : aig.gates()) r.node_rank[g.id] = next++;
  for (std::size_t i = 0; i < aig.num_outputs(); ++i) r.output_rank.push_back(next++);
  return r;
}

// ---------------------------------------------------------------------------
// Subcircuits

bool Subcircuit::contains(NodeId id) const {
  return std::find(nodes.begin(), nodes.end(), id) != nodes.end();
}

Subcircuit close_subcircuit(const Aig& aig, std::vector<NodeId> gates, std::span<const NodeId> extra_roots) {
  std::vector<std::uint8_t> in(aig.num_nodes(), 0);
  for (NodeId id : gates) {
    if (!aig.is_gate(id)) throw AigError("subcircuit member " + std::to_string(id) + " is not a gate");
    in[id] = 1;
  }
  // One topological sweep reaches the fixpoint: a gate's children precede it.
  for (const Gate& g : aig.gates()) {
    if (!in[g.id] && in[g.left.node] && in[g.right.node]) in[g.id] = 1;
  }
  Subcircuit sc;
  std::vector<std::uint8_t> boundary(aig.num_nodes(), 0);
  for (const Gate& g : aig.gates()) {
    if (!in[g.id]) continue;
    sc.nodes.push_back(g.id);
    for (Literal l : {g.left, g.right})
      if (!in[l.node] && l.node != 0) boundary[l.node] = 1;
  }
  for (NodeId id = 1; id < aig.num_nodes(); ++id)
    if (boundary[id]) sc.boundary_inputs.push_back(id);
  std::vector<std::uint8_t> root(aig.num_nodes(), 0);
  for (NodeId id : extra_roots)
    if (in[id]) root[id] = 1;
  for (NodeId id : sc.nodes) {
    if (aig.output_refs()[id] > 0) root[id] = 1;
    for (NodeId p : aig.fanouts()[id])
      if (!in[p]) root[id] = 1;
  }
  for (NodeId id : sc.nodes)
    if (root[id]) sc.roots.push_back(id);
  return sc;
}

Subcircuit extract_subcircuit(const Aig& aig, NodeId root, unsigned depth) {
  if (!aig.is_gate(root)) throw AigError("extraction root " + std::to_string(root) + " is not a gate");
  if (depth < 1) throw AigError("extraction depth must be at least 1");
  // Breadth-first over fanin edges gives the shortest edge distance.
  std::vector<std::uint32_t> dist(aig.num_nodes(), ~std::uint32_t{0});
  std::vector<NodeId> frontier{root}, members{root};
  dist[root] = 0;
  for (unsigned d = 1; d < depth && !frontier.empty(); ++d) {
    std::vector<NodeId> next;
    for (NodeId id : frontier) {
      const Gate& g = aig.gate(id);
      for (Literal l : {g.left, g.right}) {
        if (aig.is_gate(l.node) && dist[l.node] == ~std::uint32_t{0}) {
          dist[l.node] = d;
          next.push_back(l.node);
          members.push_back(l.node);
        }
      }
    }
    frontier = std::move(next);
  }
  NodeId roots[] = {root};
  return close_subcircuit(aig, std::move(members), roots);
}

bool is_valid_subcircuit(const Aig& aig, const Subcircuit& sc) {
  std::vector<std::uint8_t> in(aig.num_nodes(), 0), boundary(aig.num_nodes(), 0);
  for (NodeId id : sc.nodes) {
    if (!aig.is_gate(id)) return false;
    in[id] = 1;
  }
  for (NodeId id : sc.boundary_inputs) boundary[id] = 1;
  for (const Gate& g : aig.gates()) {
    bool left = in[g.left.node], right = in[g.right.node];
    if (!in[g.id] && left && right) return false;
    if (in[g.id]) {
      for (Literal l : {g.left, g.right})
        if (!in[l.node] && !boundary[l.node] && l.node != 0) return false;
    }
  }
  return true;
}

}  // namespace mmv
