#include "mmverify/sampler.hpp"

#include <random>

#include "mmverify/parallel.hpp"

namespace mmv {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SampleSpace::SampleSpace(const Aig& aig, Subcircuit sc, std::vector<AttachedVar> attached)
    : aig_(&aig), sc_(std::move(sc)), attached_(std::move(attached)), column_of_(aig.num_nodes(), -1) {
  std::size_t c = 0;
  for (NodeId id : sc_.boundary_inputs) column_of_.at(id) = static_cast<std::int64_t>(c++);
  for (NodeId id : sc_.nodes) column_of_.at(id) = static_cast<std::int64_t>(c++);
  for (const AttachedVar& a : attached_)
    for (NodeId f : a.factors)
      if (column_of_.at(f) < 0) throw AigError("attached variable factor outside the subcircuit");
}

std::optional<std::size_t> SampleSpace::column(NodeId id) const {
  if (id >= column_of_.size() || column_of_[id] < 0) return std::nullopt;
  return static_cast<std::size_t>(column_of_[id]);
}

NodeId SampleSpace::node_at(std::size_t column) const {
  if (column < sc_.boundary_inputs.size()) return sc_.boundary_inputs[column];
  return sc_.nodes.at(column - sc_.boundary_inputs.size());
}

SampleSpace::Operand SampleSpace::operand(Literal lit) const {
  if (lit.node == 0) return {-1, lit.negated};
  return {column_of_.at(lit.node), lit.negated};
}

namespace {

bool operand_value(const std::vector<std::uint8_t>& v, SampleSpace::Operand o) {
  bool x = o.column < 0 ? false : v[static_cast<std::size_t>(o.column)] != 0;
  return x != o.negated;
}

void fill_attached(const SampleSpace& space, std::vector<std::uint8_t>& v) {
  std::size_t c = space.first_attached_column();
  for (const AttachedVar& a : space.attached()) {
    std::uint8_t prod = 1;
    for (NodeId f : a.factors) prod &= v[*space.column(f)];
    v[c++] = prod;
  }
}

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

Sample uniform_sample(const SampleSpace& space, std::mt19937_64& rng) {
  std::vector<std::uint8_t> boundary(space.num_boundary());
  for (auto& b : boundary) b = static_cast<std::uint8_t>(rng() >> 63);
  return complete_sample(space, boundary);
}

// Assigns all boundary and gate columns by decisions in random order with
// random phase, propagating the gate equations and flipping the most recent
// unflipped decision on a conflict.
class WeightedSampler {
 public:
  explicit WeightedSampler(const SampleSpace& space) : space_(space) {
    const auto& sc = space.subcircuit();
    vars_ = space.num_boundary() + sc.nodes.size();
    watch_.resize(vars_);
    for (std::size_t k = 0; k < sc.nodes.size(); ++k) {
      const Gate& g = space.aig().gate(sc.nodes[k]);
      Eq e{static_cast<std::int64_t>(space.first_gate_column() + k), space.operand(g.left), space.operand(g.right)};
      eqs_.push_back(e);
      std::size_t idx = eqs_.size() - 1;
      watch_[static_cast<std::size_t>(e.out)].push_back(idx);
      if (e.l.column >= 0) watch_[static_cast<std::size_t>(e.l.column)].push_back(idx);
      if (e.r.column >= 0 && e.r.column != e.l.column) watch_[static_cast<std::size_t>(e.r.column)].push_back(idx);
    }
  }

  std::optional<Sample> run(std::mt19937_64& rng, std::size_t conflict_cap) {
    val_.assign(vars_, -1);
    trail_.clear();
    decisions_.clear();
    std::vector<std::size_t> order(vars_);
    for (std::size_t i = 0; i < vars_; ++i) order[i] = i;
    for (std::size_t i = vars_; i > 1; --i) std::swap(order[i - 1], order[below(rng, i)]);

    // Constant-driven implications hold before any decision.
    for (std::size_t e = 0; e < eqs_.size(); ++e) queue_.push_back(static_cast<std::size_t>(eqs_[e].out));
    if (!propagate()) return std::nullopt;

    std::size_t conflicts = 0, next = 0;
    while (true) {
      while (next < vars_ && val_[order[next]] >= 0) ++next;
      if (next == vars_) break;
      std::size_t v = order[next];
      bool phase = (rng() >> 63) != 0;
      decisions_.push_back({trail_.size(), next, phase, false});
      assign(v, phase);
      while (!propagate()) {
        if (++conflicts > conflict_cap) return std::nullopt;
        // chronological backtrack to the latest decision with an untried phase
        while (!decisions_.empty() && decisions_.back().flipped) {
          undo(decisions_.back().trail_pos);
          decisions_.pop_back();
        }
        if (decisions_.empty()) return std::nullopt;
        Decision& d = decisions_.back();
        undo(d.trail_pos);
        d.flipped = true;
        d.phase = !d.phase;
        next = d.order_pos;
        assign(order[next], d.phase);
      }
    }
    Sample s;
    s.values.assign(space_.columns(), 0);
    for (std::size_t i = 0; i < vars_; ++i) s.values[i] = static_cast<std::uint8_t>(val_[i]);
    fill_attached(space_, s.values);
    return s;
  }

 private:
  struct Eq {
    std::int64_t out;
    SampleSpace::Operand l, r;
  };
  struct Decision {
    std::size_t trail_pos, order_pos;
    bool phase, flipped;
  };

  void assign(std::size_t v, bool b) {
    val_[v] = b ? 1 : 0;
    trail_.push_back(v);
    queue_.push_back(v);
  }
  void undo(std::size_t pos) {
    while (trail_.size() > pos) {
      val_[trail_.back()] = -1;
      trail_.pop_back();
    }
    queue_.clear();
  }
  int lit(SampleSpace::Operand o) const {
    if (o.column < 0) return o.negated ? 1 : 0;
    int x = val_[static_cast<std::size_t>(o.column)];
    return x < 0 ? -1 : (x ^ (o.negated ? 1 : 0));
  }
  // Sets an operand to `b`; false on contradiction.
  bool force(SampleSpace::Operand o, bool b) {
    int cur = lit(o);
    if (cur >= 0) return cur == (b ? 1 : 0);
    assign(static_cast<std::size_t>(o.column), b != o.negated);
    return true;
  }
  bool propagate() {
    while (!queue_.empty()) {
      std::size_t v = queue_.back();
      queue_.pop_back();
      for (std::size_t idx : watch_[v]) {
        const Eq& e = eqs_[idx];
        int g = val_[static_cast<std::size_t>(e.out)], l = lit(e.l), r = lit(e.r);
        bool ok = true;
        if (g == 1) {
          ok = force(e.l, true) && force(e.r, true);
        } else if (l == 0 || r == 0) {
          ok = g == 0 || (assign(static_cast<std::size_t>(e.out), false), true);
        } else if (l == 1 && r == 1) {
          ok = g == 1 || (g < 0 && (assign(static_cast<std::size_t>(e.out), true), true));
        } else if (g == 0) {
          if (l == 1) ok = force(e.r, false);
          else if (r == 1) ok = force(e.l, false);
        }
        if (!ok) {
          queue_.clear();
          return false;
        }
      }
    }
    return true;
  }

  const SampleSpace& space_;
  std::size_t vars_ = 0;
  std::vector<Eq> eqs_;
  std::vector<std::vector<std::size_t>> watch_;
  std::vector<std::int8_t> val_;
  std::vector<std::size_t> trail_, queue_;
  std::vector<Decision> decisions_;
};

}  // namespace

Sample complete_sample(const SampleSpace& space, std::span<const std::uint8_t> boundary) {
  Sample s;
  s.values.assign(space.columns(), 0);
  for (std::size_t i = 0; i < space.num_boundary(); ++i) s.values[i] = boundary[i] ? 1 : 0;
  std::size_t c = space.first_gate_column();
  for (NodeId id : space.subcircuit().nodes) {
    const Gate& g = space.aig().gate(id);
    s.values[c++] = operand_value(s.values, space.operand(g.left)) && operand_value(s.values, space.operand(g.right));
  }
  fill_attached(space, s.values);
  return s;
}

bool is_model(const SampleSpace& space, const Sample& s) {
  if (s.values.size() != space.columns()) return false;
  std::size_t c = space.first_gate_column();
  for (NodeId id : space.subcircuit().nodes) {
    const Gate& g = space.aig().gate(id);
    bool v = operand_value(s.values, space.operand(g.left)) && operand_value(s.values, space.operand(g.right));
    if (s.values[c++] != (v ? 1 : 0)) return false;
  }
  for (const AttachedVar& a : space.attached()) {
    std::uint8_t prod = 1;
    for (NodeId f : a.factors) prod &= s.values[*space.column(f)];
    if (s.values[c++] != prod) return false;
  }
  return true;
}

std::size_t default_sample_count(const Subcircuit& sc, unsigned factor) { return factor * sc.size(); }

std::vector<Sample> sample_models(const SampleSpace& space, std::size_t count, std::uint64_t seed,
                                  SamplerKind kind, unsigned threads) {
  std::vector<Sample> out(count);
  const std::size_t cap = 4 * std::max<std::size_t>(space.subcircuit().nodes.size(), 1);
  std::size_t workers = std::min<std::size_t>(std::max(threads, 1u), std::max<std::size_t>(count, 1));
  std::size_t chunk = (count + workers - 1) / std::max<std::size_t>(workers, 1);
  parallel_for(workers, threads, [&](std::size_t w) {
    WeightedSampler weighted(space);
    for (std::size_t i = w * chunk; i < std::min(count, (w + 1) * chunk); ++i) {
      std::mt19937_64 rng(derive_seed(seed, i));
      std::optional<Sample> s;
      if (kind == SamplerKind::Weighted) s = weighted.run(rng, cap);
      out[i] = s ? std::move(*s) : uniform_sample(space, rng);
    }
  });
  return out;
}

}  // namespace mmv
