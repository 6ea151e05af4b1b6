#include "mmverify/rewrite.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "mmverify/parallel.hpp"

namespace mmv {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

Var leading_var(const MmPoly& f) {
  const Monomial& m = leading_term(f).monomial;
  return m.is_one() ? 0 : m.max_var();
}

}  // namespace

void RelationCache::add(MmPoly relation, Provenance provenance) {
  if (relation.is_zero() || !relation.is_linear()) throw AlgebraError("cached relations must be linear and nonzero");
  Var v = leading_var(relation);
  if (v == 0) throw AlgebraError("relation without a leading variable");
  by_var_[v].push_back({std::move(relation), provenance});
  ++count_;
}

const RelationCache::Entry* RelationCache::find(Var leading) const {
  auto it = by_var_.find(leading);
  return it == by_var_.end() || it->second.empty() ? nullptr : &it->second.front();
}

std::size_t RelationCache::count(Provenance p) const {
  std::size_t n = 0;
  for (const auto& [v, list] : by_var_)
    for (const Entry& e : list) n += e.provenance == p;
  return n;
}

RelationCache preprocess_relations(const CircuitEncoding& enc, const std::vector<AdderInstance>& adders) {
  RelationCache cache;
  const auto& basis = enc.ring->basis;
  for (const AdderInstance& a : adders) {
    MmPoly rel = mm_add(mm_scale(literal_poly(enc.ring, enc.layout, a.carry), mm_reduce_scalar(2, basis)),
                        literal_poly(enc.ring, enc.layout, a.sum));
    for (Literal in : a.inputs) rel = mm_sub(rel, literal_poly(enc.ring, enc.layout, in));
    if (rel.is_zero()) continue;
    cache.add(std::move(rel), Provenance::Preprocessing);
  }
  return cache;
}

std::vector<AttachedVar> attach_extension_vars(const Subcircuit& sc, const CircuitEncoding& enc) {
  std::vector<NodeId> members(sc.nodes);
  members.insert(members.end(), sc.boundary_inputs.begin(), sc.boundary_inputs.end());
  std::sort(members.begin(), members.end());
  std::vector<AttachedVar> out;
  for (const ExtensionVar& e : enc.extensions) {
    AttachedVar a{e.var, {}};
    bool inside = true;
    for (const Factor& f : e.monomial.factors()) {
      if (!enc.layout.is_input_var(f.var) && !enc.layout.is_gate_var(f.var)) {
        inside = false;
        break;
      }
      NodeId id = enc.layout.node_of(f.var);
      if (!std::binary_search(members.begin(), members.end(), id)) {
        inside = false;
        break;
      }
      a.factors.push_back(id);
    }
    if (inside) out.push_back(std::move(a));
  }
  return out;
}

namespace {

// Samples, matrix and per-prime kernels of one subcircuit. Only the candidate
// selection depends on the target, so a session serves many targets.
class GuessSession {
 public:
  GuessSession(const Subcircuit& sc, const Aig& aig, const CircuitEncoding& enc, const LinearConfig& cfg,
               RunStats& stats, std::uint64_t round);
  std::optional<MmPoly> solve(NodeId target, RunStats& stats);

 private:
  const std::vector<std::vector<Residue>>& kernel(std::size_t lane);

  const CircuitEncoding& enc_;
  const LinearConfig& cfg_;
  SampleSpace space_;
  std::vector<std::size_t> cols_;
  std::vector<Var> col_var_;
  std::vector<ColumnInfo> info_;
  std::optional<GuessSystem> system_;
  std::vector<std::optional<std::vector<std::vector<Residue>>>> kernels_;
  unsigned refuted_rounds_ = 0;
};

GuessSession::GuessSession(const Subcircuit& sc, const Aig& aig, const CircuitEncoding& enc, const LinearConfig& cfg,
                           RunStats& stats, std::uint64_t round)
    : enc_(enc), cfg_(cfg), space_(aig, sc, attach_extension_vars(sc, enc)), kernels_(enc.ring->basis.size()) {
  // Matrix columns: every sample column, then the constant.
  cols_.resize(space_.columns());
  for (std::size_t c = 0; c < cols_.size(); ++c) cols_[c] = c;
  col_var_.resize(space_.columns());
  info_.resize(space_.columns() + 1);
  std::vector<std::uint8_t> is_root(aig.num_nodes(), 0);
  for (NodeId r : sc.roots) is_root[r] = 1;
  for (std::size_t c = 0; c < space_.columns(); ++c) {
    if (c < space_.first_attached_column()) {
      NodeId id = space_.node_at(c);
      col_var_[c] = enc.layout.node_var(id);
      info_[c].interface = c < space_.num_boundary() || is_root[id];
    } else {
      col_var_[c] = space_.attached()[c - space_.first_attached_column()].var;
      info_[c].interface = true;
    }
    info_[c].rank = enc.ring->order.rank(col_var_[c]);
  }
  info_.back().constant = true;

  const std::uint64_t seed = derive_seed(cfg.seed, round);
  const std::size_t count = std::max(default_sample_count(sc, cfg.sample_factor), 2 * space_.columns() + 32);
  Stopwatch sw;
  auto samples = sample_models(space_, count, derive_seed(seed, 0), cfg.sampler, cfg.threads);
  stats.sample.add(sw.seconds());

  sw = Stopwatch();
  system_.emplace(samples, cols_, derive_seed(seed, 1));
  // Too few distinct samples leave a wide kernel. Resample while that helps.
  std::size_t dim = kernel(0).size();
  double sampling = 0;
  for (unsigned r = 0; r < cfg.max_resamples && dim > (space_.columns() + 1) / 2; ++r) {
    Stopwatch ss;
    auto more = sample_models(space_, count, derive_seed(seed, 2 + r), cfg.sampler, cfg.threads);
    sampling += ss.seconds();
    stats.sample.add(ss.seconds());
    system_->add_samples(more);
    system_->reproject();
    for (auto& k : kernels_) k.reset();
    ++stats.resamples;
    std::size_t next = kernel(0).size();
    if (next >= dim) break;
    dim = next;
  }
  stats.guess.add(sw.seconds() - sampling);
}

const std::vector<std::vector<Residue>>& GuessSession::kernel(std::size_t lane) {
  if (!kernels_[lane]) kernels_[lane] = system_->kernel(enc_.ring->basis[lane]);
  return *kernels_[lane];
}

std::optional<MmPoly> GuessSession::solve(NodeId target, RunStats& stats) {
  const PrimeBasis& basis = enc_.ring->basis;
  const std::size_t lanes = basis.size();
  ++stats.guess_rounds;
  auto target_col = space_.column(target);
  if (!target_col || *target_col < space_.first_gate_column()) throw AigError("guess target outside the subcircuit");

  struct Lane {
    std::vector<CandidateRelation> cands;
    std::size_t next = 0;
    std::optional<CandidateRelation> proven;
    std::optional<Sample> witness;
    bool failed = false;
    std::size_t tried = 0, sat_calls = 0, excluded = 0, discarded = 0;
  };
  std::vector<Lane> lane(lanes);
  Stopwatch sw;
  parallel_for(lanes, cfg_.threads, [&](std::size_t l) {
    Stopwatch t;
    lane[l].cands = candidates(kernel(l), info_, *target_col, basis[l]);
    stats.lane_guess[l] += t.seconds();
  });
  stats.guess.add(sw.seconds());

  for (unsigned rep = 0;; ++rep) {
    sw = Stopwatch();
    parallel_for(lanes, cfg_.threads, [&](std::size_t l) {
      Lane& st = lane[l];
      if (st.proven || st.failed) return;
      Stopwatch t;
      st.witness.reset();
      while (st.next < st.cands.size()) {
        LinearForm f = lift_relation(st.cands[st.next], cols_);
        ++st.tried;
        ProofOutcome out = prove_relation(space_, f, basis[l], cfg_.prove);
        st.sat_calls += out.sat_calls;
        st.excluded += out.excluded_count;
        if (out.verdict == ProofOutcome::Verdict::Proven) {
          st.proven = st.cands[st.next];
          break;
        }
        if (out.verdict == ProofOutcome::Verdict::Refuted) {
          st.witness = std::move(out.witness);
          break;
        }
        ++st.discarded;
        ++st.next;
      }
      if (!st.proven && !st.witness) st.failed = true;
      stats.lane_prove[l] += t.seconds();
    });
    stats.prove.add(sw.seconds());
    for (Lane& st : lane) {
      stats.candidates_tried += st.tried;
      stats.prove_calls += st.tried;
      stats.sat_calls += st.sat_calls;
      stats.excluded += st.excluded;
      stats.discarded += st.discarded;
      st.tried = st.sat_calls = st.excluded = st.discarded = 0;
    }
    if (std::any_of(lane.begin(), lane.end(), [](const Lane& st) { return st.failed; })) return std::nullopt;
    if (std::all_of(lane.begin(), lane.end(), [](const Lane& st) { return st.proven.has_value(); })) break;
    if (rep >= cfg_.max_repairs) return std::nullopt;

    // Repair: every witness is a model, so it enriches all lanes.
    sw = Stopwatch();
    ++stats.repair_rounds;
    // A witness already among the rows means the projection hid it.
    bool seen_row = false;
    for (Lane& st : lane)
      if (st.witness && !system_->add_witness(*st.witness)) seen_row = true;
    if (++refuted_rounds_ % cfg_.reproject_after == 0 || seen_row) {
      system_->reproject();
      ++stats.reprojections;
    }
    for (auto& k : kernels_) k.reset();
    parallel_for(lanes, cfg_.threads, [&](std::size_t l) {
      Lane& st = lane[l];
      Stopwatch t;
      kernel(l);
      if (!st.proven) {
        st.cands = candidates(kernel(l), info_, *target_col, basis[l]);
        st.next = 0;
      }
      stats.lane_repair[l] += t.seconds();
    });
    stats.repair.add(sw.seconds());
  }

  std::vector<std::pair<Monomial, CoeffVec>> terms;
  for (std::size_t l = 0; l < lanes; ++l) {
    const auto& co = lane[l].proven->coeffs;
    for (std::size_t c = 0; c < co.size(); ++c) {
      if (co[c] == 0) continue;
      CoeffVec v(lanes, 0);
      v[l] = co[c];
      Monomial m = c < space_.columns() ? Monomial::variable(col_var_[c]) : Monomial();
      terms.emplace_back(std::move(m), std::move(v));
    }
  }
  MmPoly rel = MmPoly::from_terms(enc_.ring, std::move(terms));
  if (rel.is_zero() || leading_var(rel) != enc_.layout.node_var(target) || !leading_term(rel).coeff.all_nonzero())
    return std::nullopt;
  ++stats.relations_learned;
  return rel;
}

}  // namespace

std::optional<MmPoly> guess_and_prove(const Subcircuit& sc, NodeId target, const Aig& aig, const CircuitEncoding& enc,
                                      const LinearConfig& cfg, RunStats& stats, std::uint64_t round) {
  GuessSession session(sc, aig, enc, cfg, stats, round);
  return session.solve(target, stats);
}

LinearOutcome linear_phase(MmPoly spec, const Aig& aig, const CircuitEncoding& enc, const FsaApproximation& fsa,
                           RelationCache& cache, const LinearConfig& cfg, RunStats& stats) {
  LinearOutcome out{false, spec, {}};
  std::uint64_t round = 0;
  Stopwatch rewrite_clock;
  double outside = 0;  // time spent in extraction and guess-and-prove
  std::optional<GuessSession> fsa_session;
  auto finish = [&](bool verified, MmPoly s, std::string reason) {
    stats.linear_rewrite.add(rewrite_clock.seconds() - outside);
    return LinearOutcome{verified, std::move(s), std::move(reason)};
  };
  if (!spec.is_linear()) return finish(false, std::move(spec), "specification is not linear");
  while (true) {
    if (spec.is_zero()) return finish(true, std::move(spec), {});
    Var v = leading_var(spec);
    if (v == 0) return finish(false, std::move(spec), "nonzero constant remainder");
    if (!enc.layout.is_gate_var(v)) return finish(false, std::move(spec), "leading variable " + enc.var_name(aig, v) + " is not a gate");
    if (const auto* e = cache.find(v)) {
      spec = reduce_step(spec, e->relation);
      ++stats.linear_steps;
      continue;
    }
    NodeId node = enc.layout.node_of(v);
    Stopwatch sw;
    std::optional<MmPoly> rel;
    const unsigned m = cfg.depth.max_escalations;
    // The FSA region is tried first when it holds the gate, then growing cones.
    bool in_fsa = m > 0 && fsa.region.contains(node);
    for (unsigned k = in_fsa ? 0 : 1; m > 0 && k <= m + 1 && !rel; ++k) {
      if (k > 1 || (k == 1 && in_fsa)) ++stats.escalations;
      if (k == 0) {
        if (!fsa_session) fsa_session.emplace(fsa.region, aig, enc, cfg, stats, round++);
        rel = fsa_session->solve(node, stats);
        continue;
      }
      Stopwatch ex;
      Subcircuit sc = extract_subcircuit(aig, node, cfg.depth.initial + (k - 1) * cfg.depth.increment);
      stats.extract.add(ex.seconds());
      rel = guess_and_prove(sc, node, aig, enc, cfg, stats, round++);
    }
    outside += sw.seconds();
    if (!rel) {
      ++stats.failed_extractions;
      return finish(false, std::move(spec), "no linear relation for " + enc.var_name(aig, v));
    }
    cache.add(*rel, Provenance::GuessProve);
  }
}

// ---------------------------------------------------------------------------

namespace {

void guard(const MmPoly& f, std::size_t limit, RunStats* stats) {
  if (stats) stats->max_terms = std::max(stats->max_terms, f.size());
  if (f.size() > limit) throw ResourceError("polynomial exceeds " + std::to_string(limit) + " terms");
}

MmPoly tail_of(const MmPoly& gate_poly, Var v) {
  return mm_sub(MmPoly::variable(gate_poly.ring(), v), gate_poly);
}

}  // namespace

SimplifiedEncoding simplify_encoding(const CircuitEncoding& enc, const Aig& aig, std::size_t term_limit) {
  SimplifiedEncoding out{enc, std::vector<std::uint8_t>(aig.num_gates(), 0)};
  for (const Gate& g : aig.gates()) {
    std::size_t fanout = aig.fanouts()[g.id].size() + aig.output_refs()[g.id];
    if (fanout == 1 && aig.output_refs()[g.id] == 0) out.eliminated[aig.index(g.id)] = 1;
  }
  std::vector<MmPoly> tails;
  tails.reserve(aig.num_gates());
  for (const Gate& g : aig.gates()) {
    Var v = enc.layout.node_var(g.id);
    MmPoly tail = tail_of(enc.gate_poly(aig, g.id), v);
    // Children precede the gate, so their tails are already expanded.
    NodeId kids[2] = {g.left.node, g.right.node};
    if (kids[0] == kids[1]) kids[1] = 0;
    for (NodeId c : kids) {
      if (!aig.is_gate(c) || !out.eliminated[aig.index(c)]) continue;
      tail = tail.substitute(enc.layout.node_var(c), tails[aig.index(c)], true);
      guard(tail, term_limit, nullptr);
    }
    tails.push_back(tail);
  }
  for (const Gate& g : aig.gates()) {
    std::size_t i = aig.index(g.id);
    Var v = enc.layout.node_var(g.id);
    out.enc.gate_polys[i] = mm_sub(MmPoly::variable(enc.ring, v), tails[i]);
  }
  return out;
}

MmPoly nonlinear_normal_form(const MmPoly& spec, const CircuitEncoding& enc, const Aig& aig, RunStats* stats,
                             std::size_t term_limit) {
  MmPoly f = delinearize(spec, enc.extensions).boolean_reduced();
  std::vector<std::uint8_t> present(enc.layout.num_vars(), 0);
  for (Var v : f.support()) present[v] = 1;
  auto gates = aig.gates();
  for (std::size_t i = gates.size(); i-- > 0;) {
    Var v = enc.layout.node_var(gates[i].id);
    if (!present[v]) continue;
    MmPoly tail = tail_of(enc.gate_polys[i], v);
    f = f.substitute(v, tail, true);
    for (Var w : tail.support()) present[w] = 1;
    if (stats) ++stats->nonlinear_steps;
    guard(f, term_limit, stats);
  }
  for (Var v : f.support())
    if (enc.layout.is_gate_var(v)) throw AlgebraError("gate variable left in normal form");
  return f;
}

std::vector<std::uint8_t> extract_counterexample(const MmPoly& nf, const CircuitEncoding& enc, const Aig& aig,
                                                 std::uint64_t seed) {
  if (nf.is_zero()) throw EncodingError("zero polynomial has no counterexample");
  std::vector<Var> support = nf.support();
  for (Var v : support)
    if (!enc.layout.is_input_var(v)) throw EncodingError("normal form mentions " + enc.var_name(aig, v));
  std::vector<std::uint8_t> assignment(aig.num_inputs(), 0);
  auto position = [&](Var v) { return aig.index(enc.layout.node_of(v)); };
  auto nonzero_at = [&](const std::vector<std::uint8_t>& bits) {
    return !nf.evaluate([&](Var v) { return bits[position(v)] != 0; }).is_zero();
  };

  if (support.size() <= 20) {
    // Terms as support masks; a term contributes where its mask is set.
    std::vector<std::uint32_t> masks(nf.size(), 0);
    for (std::size_t t = 0; t < nf.size(); ++t)
      for (const Factor& f : nf.monomial(t).factors())
        masks[t] |= 1u << (std::lower_bound(support.begin(), support.end(), f.var) - support.begin());
    const std::size_t lanes = nf.lanes();
    std::vector<Residue> acc(lanes);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << support.size()); ++x) {
      std::fill(acc.begin(), acc.end(), 0);
      for (std::size_t t = 0; t < nf.size(); ++t) {
        if (masks[t] & ~static_cast<std::uint32_t>(x)) continue;
        auto c = nf.coeff(t);
        for (std::size_t l = 0; l < lanes; ++l) acc[l] = add_mod(acc[l], c[l], nf.basis()[l]);
      }
      if (std::any_of(acc.begin(), acc.end(), [](Residue r) { return r != 0; })) {
        for (std::size_t i = 0; i < support.size(); ++i) assignment[position(support[i])] = (x >> i) & 1u;
        return assignment;
      }
    }
    throw EncodingError("no nonzero point found");
  }

  std::mt19937_64 rng(derive_seed(seed, 77));
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (Var v : support) assignment[position(v)] = static_cast<std::uint8_t>(rng() >> 63);
    if (nonzero_at(assignment)) return assignment;
    for (Var v : support) {
      assignment[position(v)] ^= 1;
      if (nonzero_at(assignment)) return assignment;
      assignment[position(v)] ^= 1;
    }
  }
  // A term of minimal degree is the only one alive at its own indicator point.
  std::size_t best = 0;
  for (std::size_t t = 1; t < nf.size(); ++t)
    if (nf.monomial(t).degree() < nf.monomial(best).degree()) best = t;
  std::fill(assignment.begin(), assignment.end(), 0);
  for (const Factor& f : nf.monomial(best).factors()) assignment[position(f.var)] = 1;
  return assignment;
}

std::optional<std::vector<std::uint8_t>> simulated_witness(const MmPoly& f, const CircuitEncoding& enc,
                                                           const Aig& aig, std::uint64_t seed, unsigned batches) {
  std::vector<std::uint8_t> is_gate_or_input(enc.layout.num_vars(), 0);
  for (Var v : f.support()) {
    if (enc.layout.is_output_var(v)) throw EncodingError("output variable in remainder");
    is_gate_or_input[v] = !enc.layout.is_ext_var(v);
  }
  std::mt19937_64 rng(derive_seed(seed, 91));
  std::vector<std::uint64_t> words(aig.num_inputs());
  for (unsigned b = 0; b < batches; ++b) {
    for (auto& w : words) w = rng();
    if (b == 0) {
      // Lane 0 all zeros, lane 1 all ones.
      for (auto& w : words) w = (w & ~std::uint64_t{3}) | 2;
    }
    auto values = aig.simulate_words(words);
    for (unsigned bit = 0; bit < 64; ++bit) {
      auto node_bit = [&](NodeId id) { return (values[id] >> bit) & 1u; };
      auto value = [&](Var v) -> bool {
        if (is_gate_or_input[v]) return node_bit(enc.layout.node_of(v));
        const Monomial& m = enc.extensions[enc.layout.ext_index(v)].monomial;
        for (const Factor& x : m.factors())
          if (!node_bit(enc.layout.node_of(x.var))) return false;
        return true;
      };
      if (f.evaluate(value).is_zero()) continue;
      std::vector<std::uint8_t> out(aig.num_inputs());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = (words[i] >> bit) & 1u;
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace mmv
