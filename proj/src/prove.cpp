#include "mmverify/prove.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>

namespace mmv {

std::int64_t LinearForm::evaluate(const Sample& s) const {
  std::int64_t v = constant;
  for (const auto& [c, k] : terms)
    if (s.values.at(c)) v += k;
  return v;
}

std::uint64_t LinearForm::weight() const {
  std::uint64_t w = static_cast<std::uint64_t>(constant < 0 ? -constant : constant);
  for (const auto& t : terms) w += static_cast<std::uint64_t>(t.second < 0 ? -t.second : t.second);
  return w;
}

LinearForm lift_relation(const CandidateRelation& rel, std::span<const std::size_t> columns) {
  const Residue p = rel.p;
  std::vector<Residue> scales;
  for (Residue t = 1; t <= 16 && t < p; ++t) scales.push_back(t);
  for (Residue c : rel.coeffs) {
    if (c == 0) continue;
    Residue inv = inv_mod(c, p);
    for (Residue t = 1; t <= 16 && t < p; ++t) scales.push_back(mul_mod(inv, t, p));
  }
  Residue best = 1;
  std::uint64_t best_weight = ~std::uint64_t{0};
  for (Residue lam : scales) {
    std::uint64_t w = 0;
    for (Residue c : rel.coeffs) {
      std::int64_t s = symmetric(mul_mod(c, lam, p), p);
      w += static_cast<std::uint64_t>(s < 0 ? -s : s);
    }
    if (w < best_weight || (w == best_weight && lam < best)) {
      best_weight = w;
      best = lam;
    }
  }
  LinearForm f;
  const std::size_t n = rel.coeffs.size();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (rel.coeffs[j] == 0) continue;
    f.terms.emplace_back(columns[j], symmetric(mul_mod(rel.coeffs[j], best, p), p));
  }
  f.constant = symmetric(mul_mod(rel.coeffs[n - 1], best, p), p);
  return f;
}

namespace {

class CnfBuilder {
 public:
  explicit CnfBuilder(sat::Cnf& cnf) : cnf_(cnf) {
    true_ = cnf_.new_var();
    cnf_.add({true_});
  }
  int t() const { return true_; }

  int xor2(int a, int b) {
    int s = cnf_.new_var();
    cnf_.add({-s, a, b});
    cnf_.add({-s, -a, -b});
    cnf_.add({s, -a, b});
    cnf_.add({s, a, -b});
    return s;
  }
  int and2(int a, int b) {
    int c = cnf_.new_var();
    cnf_.add({-c, a});
    cnf_.add({-c, b});
    cnf_.add({c, -a, -b});
    return c;
  }
  int xor3(int a, int b, int c) {
    int s = cnf_.new_var();
    for (int m = 0; m < 8; ++m) {
      int sa = (m & 1) ? a : -a, sb = (m & 2) ? b : -b, sc = (m & 4) ? c : -c;
      bool parity = ((m & 1) != 0) ^ ((m & 2) != 0) ^ ((m & 4) != 0);
      // assignment with the listed phases true implies s == parity
      cnf_.add({-sa, -sb, -sc, parity ? s : -s});
    }
    return s;
  }
  int maj3(int a, int b, int c) {
    int m = cnf_.new_var();
    cnf_.add({-a, -b, m});
    cnf_.add({-a, -c, m});
    cnf_.add({-b, -c, m});
    cnf_.add({a, b, -m});
    cnf_.add({a, c, -m});
    cnf_.add({b, c, -m});
    return m;
  }

  // Binary value of a weighted bit sum by column compression; 0 marks a constant-false bit.
  std::vector<int> sum(std::map<unsigned, std::deque<int>> cols) {
    std::vector<int> out;
    for (unsigned b = 0; !cols.empty(); ++b) {
      auto it = cols.find(b);
      if (it == cols.end()) {
        out.push_back(0);
        continue;
      }
      std::deque<int> q = std::move(it->second);
      cols.erase(it);
      while (q.size() >= 2) {
        if (q.size() >= 3) {
          int x = q[0], y = q[1], z = q[2];
          q.erase(q.begin(), q.begin() + 3);
          q.push_back(xor3(x, y, z));
          cols[b + 1].push_back(maj3(x, y, z));
        } else {
          int x = q[0], y = q[1];
          q.clear();
          q.push_back(xor2(x, y));
          cols[b + 1].push_back(and2(x, y));
        }
      }
      out.push_back(q.empty() ? 0 : q[0]);
    }
    return out;
  }

 private:
  sat::Cnf& cnf_;
  int true_;
};

void add_bits(std::map<unsigned, std::deque<int>>& cols, std::uint64_t mag, int lit) {
  for (unsigned b = 0; mag; ++b, mag >>= 1)
    if (mag & 1) cols[b].push_back(lit);
}

}  // namespace

CnfEncoding encode_cnf(const SampleSpace& space, const LinearForm& f) {
  CnfEncoding enc;
  CnfBuilder b(enc.cnf);
  enc.column_var.resize(space.columns());
  for (auto& v : enc.column_var) v = enc.cnf.new_var();
  auto operand = [&](Literal lit) {
    auto o = space.operand(lit);
    int x = o.column < 0 ? -b.t() : enc.column_var[static_cast<std::size_t>(o.column)];
    return o.negated ? -x : x;
  };
  std::size_t c = space.first_gate_column();
  for (NodeId id : space.subcircuit().nodes) {
    const Gate& g = space.aig().gate(id);
    int out = enc.column_var[c++], l = operand(g.left), r = operand(g.right);
    enc.cnf.add({-out, l});
    enc.cnf.add({-out, r});
    enc.cnf.add({out, -l, -r});
  }
  for (const AttachedVar& a : space.attached()) {
    int out = enc.column_var[c++];
    std::vector<int> big{out};
    for (NodeId fct : a.factors) {
      int x = enc.column_var[*space.column(fct)];
      enc.cnf.add({-out, x});
      big.push_back(-x);
    }
    enc.cnf.add(big);
  }

  std::map<unsigned, std::deque<int>> pos, neg;
  for (const auto& [col, k] : f.terms) {
    int x = enc.column_var.at(col);
    if (k > 0) add_bits(pos, static_cast<std::uint64_t>(k), x);
    else if (k < 0) add_bits(neg, static_cast<std::uint64_t>(-k), x);
  }
  if (f.constant > 0) add_bits(pos, static_cast<std::uint64_t>(f.constant), b.t());
  if (f.constant < 0) add_bits(neg, static_cast<std::uint64_t>(-f.constant), b.t());
  std::vector<int> pb = b.sum(std::move(pos)), nb = b.sum(std::move(neg));
  std::vector<int> differ;
  for (std::size_t i = 0; i < std::max(pb.size(), nb.size()); ++i) {
    int x = i < pb.size() ? pb[i] : 0, y = i < nb.size() ? nb[i] : 0;
    if (!x && !y) continue;
    differ.push_back(!x ? y : !y ? x : b.xor2(x, y));
  }
  if (differ.empty()) differ.push_back(-b.t());
  enc.cnf.add(differ);
  return enc;
}

Sample decode_model(const SampleSpace& space, const CnfEncoding& enc, const sat::Result& r) {
  Sample s;
  s.values.resize(space.columns());
  for (std::size_t c = 0; c < space.columns(); ++c) s.values[c] = r.value(enc.column_var[c]) ? 1 : 0;
  return s;
}

namespace {

bool multiple_of(std::int64_t v, Residue p) { return v % static_cast<std::int64_t>(p) == 0; }

ProofOutcome prove_exhaustive(const SampleSpace& space, const LinearForm& f, Residue p, const ProveOptions& opt) {
  ProofOutcome out;
  const std::size_t nb = space.num_boundary();
  if (nb > 63) throw ProveError("too many boundary inputs for enumeration");
  const std::uint64_t total = std::uint64_t{1} << nb;
  const auto& nodes = space.subcircuit().nodes;
  std::vector<std::uint64_t> w(space.columns());
  auto word = [&](SampleSpace::Operand o) {
    std::uint64_t x = o.column < 0 ? 0 : w[static_cast<std::size_t>(o.column)];
    return o.negated ? ~x : x;
  };
  for (std::uint64_t base = 0; base < total; base += 64) {
    const unsigned lanes = static_cast<unsigned>(std::min<std::uint64_t>(64, total - base));
    for (std::size_t i = 0; i < nb; ++i) {
      std::uint64_t x = 0;
      for (unsigned k = 0; k < lanes; ++k) x |= (((base + k) >> i) & 1u) << k;
      w[i] = x;
    }
    std::size_t c = space.first_gate_column();
    for (NodeId id : nodes) {
      const Gate& g = space.aig().gate(id);
      w[c++] = word(space.operand(g.left)) & word(space.operand(g.right));
    }
    for (const AttachedVar& a : space.attached()) {
      std::uint64_t x = ~std::uint64_t{0};
      for (NodeId fct : a.factors) x &= w[*space.column(fct)];
      w[c++] = x;
    }
    std::int64_t val[64];
    std::fill(val, val + 64, f.constant);
    for (const auto& [col, k] : f.terms)
      for (std::uint64_t x = w[col]; x; x &= x - 1) val[std::countr_zero(x)] += k;
    for (unsigned k = 0; k < lanes; ++k) {
      if (val[k] == 0) continue;
      if (!multiple_of(val[k], p)) {
        std::vector<std::uint8_t> bits(nb);
        for (std::size_t i = 0; i < nb; ++i) bits[i] = ((base + k) >> i) & 1u;
        out.witness = complete_sample(space, bits);
        out.verdict = ProofOutcome::Verdict::Refuted;
        out.sat_calls = out.excluded_count + 1;
        return out;
      }
      if (++out.excluded_count > opt.exclusion_cap) {
        out.verdict = ProofOutcome::Verdict::Discarded;
        out.note = "exclusion cap reached";
        out.sat_calls = out.excluded_count;
        return out;
      }
    }
  }
  out.verdict = ProofOutcome::Verdict::Proven;
  out.sat_calls = out.excluded_count + 1;
  return out;
}

std::filesystem::path cnf_path(const ProveOptions& opt) {
  static std::atomic<std::uint64_t> counter{0};
  std::filesystem::path dir = opt.keep_cnf_dir.empty() ? std::filesystem::temp_directory_path()
                                                       : std::filesystem::path(opt.keep_cnf_dir);
  std::filesystem::create_directories(dir);
  return dir / ("mmv-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".cnf");
}

// Shared exclusion loop over an incremental solve callback.
template <typename SolveFn, typename BlockFn>
ProofOutcome exclusion_loop(const SampleSpace& space, const CnfEncoding& enc, const LinearForm& f, Residue p,
                            const ProveOptions& opt, SolveFn&& solve, BlockFn&& block) {
  ProofOutcome out;
  while (true) {
    sat::Result r = solve();
    ++out.sat_calls;
    if (r.status == sat::Status::Unsat) {
      out.verdict = ProofOutcome::Verdict::Proven;
      return out;
    }
    if (r.status == sat::Status::Unknown) {
      out.verdict = ProofOutcome::Verdict::Discarded;
      out.note = "solver gave no answer";
      return out;
    }
    Sample s = decode_model(space, enc, r);
    if (!is_model(space, s)) throw ProveError("solver model violates the subcircuit");
    std::int64_t v = f.evaluate(s);
    if (v == 0) throw ProveError("solver model does not satisfy the disequality");
    if (!multiple_of(v, p)) {
      out.verdict = ProofOutcome::Verdict::Refuted;
      out.witness = std::move(s);
      return out;
    }
    if (++out.excluded_count > opt.exclusion_cap) {
      out.verdict = ProofOutcome::Verdict::Discarded;
      out.note = "exclusion cap reached";
      return out;
    }
    std::vector<sat::Lit> blocking;
    for (std::size_t i = 0; i < space.num_boundary(); ++i)
      blocking.push_back(s.values[i] ? -enc.column_var[i] : enc.column_var[i]);
    if (blocking.empty()) blocking.push_back(-1);  // variable 1 is the constant-true unit
    block(blocking);
  }
}

}  // namespace

ProofOutcome prove_relation(const SampleSpace& space, const LinearForm& f, Residue p, const ProveOptions& opt) {
  const std::size_t nb = space.num_boundary();
  Backend backend = opt.backend;
  if (backend == Backend::Auto) backend = nb <= opt.auto_exhaustive ? Backend::Exhaustive : Backend::Cdcl;
  if (backend == Backend::Exhaustive) {
    if (nb > opt.exhaustive_limit) throw ProveError("enumeration needs at most " + std::to_string(opt.exhaustive_limit) + " boundary inputs");
    return prove_exhaustive(space, f, p, opt);
  }
  CnfEncoding enc = encode_cnf(space, f);
  if (backend == Backend::Cdcl && opt.keep_cnf_dir.empty()) {
    sat::Solver solver;
    solver.add_cnf(enc.cnf);
    return exclusion_loop(
        space, enc, f, p, opt,
        [&] {
          sat::Result r;
          r.status = solver.solve();
          if (r.status == sat::Status::Sat) r.model = solver.model();
          return r;
        },
        [&](const std::vector<sat::Lit>& c) { solver.add_clause(c); });
  }
  // File-based: the external solver, or the internal one with kept CNF files.
  sat::Cnf cnf = enc.cnf;
  std::vector<std::filesystem::path> written;
  auto solve_file = [&]() {
    auto path = cnf_path(opt);
    {
      std::ofstream os(path);
      os << write_dimacs(cnf);
    }
    written.push_back(path);
    if (backend == Backend::External) return sat::run_external(opt.solver_path, path.string(), cnf.num_vars, opt.timeout_sec);
    return sat::solve_cnf(cnf);
  };
  auto cleanup = [&] {
    if (opt.keep_cnf_dir.empty()) {
      std::error_code ec;
      for (const auto& w : written) std::filesystem::remove(w, ec);
    }
  };
  try {
    ProofOutcome out = exclusion_loop(space, enc, f, p, opt, solve_file,
                                      [&](const std::vector<sat::Lit>& c) { cnf.add(c); });
    cleanup();
    return out;
  } catch (const sat::SatError& e) {
    cleanup();
    if (nb <= opt.exhaustive_limit) return prove_exhaustive(space, f, p, opt);
    throw ProveError(std::string("external SAT solver failed: ") + e.what());
  }
}

}  // namespace mmv
