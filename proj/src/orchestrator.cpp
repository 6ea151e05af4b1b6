#include "mmverify/orchestrator.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mmv {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

bool only_inputs_and_extensions(const MmPoly& f, const VarLayout& layout) {
  for (Var v : f.support())
    if (!layout.is_input_var(v) && !layout.is_ext_var(v)) return false;
  return true;
}

}  // namespace

Engine parse_engine(const std::string& name) {
  if (name == "hybrid") return Engine::Hybrid;
  if (name == "linear" || name == "linear-only") return Engine::Linear;
  if (name == "nonlinear" || name == "nonlinear-only") return Engine::Nonlinear;
  throw std::invalid_argument("unknown engine '" + name + "'");
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::Hybrid: return "hybrid";
    case Engine::Linear: return "linear";
    case Engine::Nonlinear: return "nonlinear";
  }
  return "?";
}

std::string status_name(Status s) {
  switch (s) {
    case Status::Correct: return "correct";
    case Status::Incorrect: return "incorrect";
    case Status::Error: return "error";
  }
  return "?";
}

int exit_code(Status s) {
  switch (s) {
    case Status::Correct: return 0;
    case Status::Incorrect: return 1;
    case Status::Error: return 2;
  }
  return 2;
}

Verdict verify(const Config& cfg) {
  Verdict out;
  Stopwatch total;
  auto fail = [&](std::string msg) {
    out.status = Status::Error;
    out.message = std::move(msg);
    out.witness.reset();
    out.total_seconds = total.seconds();
    return out;
  };

  try {
    Stopwatch sw;
    Aig aig = cfg.aig ? *cfg.aig : read_aiger_file(cfg.input_path);
    for (std::size_t i = 0; i < aig.num_inputs(); ++i)
      out.input_names.push_back(aig.input_name(i).empty() ? "i" + std::to_string(i) : aig.input_name(i));
    Problem problem = build_problem(aig, cfg.spec);
    out.encode.add(sw.seconds());
    const CircuitEncoding& enc = problem.enc;
    const PrimeBasis& basis = enc.ring->basis;
    out.primes.assign(basis.primes().begin(), basis.primes().end());
    out.threads = cfg.threads ? cfg.threads : static_cast<unsigned>(basis.size());
    out.stats = RunStats(basis.size());
    RunStats& stats = out.stats;

    if (!problem.task.spec) return fail("no linear specification");
    MmPoly spec = *problem.task.spec;

    if (cfg.engine != Engine::Nonlinear) {
      sw = Stopwatch();
      auto cuts = enumerate_cuts(aig);
      auto adders = detect_adders(aig, cuts);
      RelationCache cache = preprocess_relations(enc, adders);
      FsaApproximation fsa = approximate_fsa(aig, adders);
      stats.preprocess.add(sw.seconds());
      stats.preprocessing_relations = cache.size();

      LinearConfig lc;
      lc.depth = cfg.depth;
      lc.sampler = cfg.sampler;
      lc.sample_factor = cfg.sample_factor;
      lc.seed = cfg.seed;
      lc.threads = out.threads;
      lc.prove.backend = cfg.sat_solver_path.empty() ? cfg.backend : Backend::External;
      lc.prove.solver_path = cfg.sat_solver_path;
      lc.prove.timeout_sec = cfg.sat_timeout;
      lc.prove.keep_cnf_dir = cfg.keep_cnf_dir;
      if (!cfg.keep_cnf_dir.empty()) std::filesystem::create_directories(cfg.keep_cnf_dir);

      LinearOutcome lin = linear_phase(spec, aig, enc, fsa, cache, lc, stats);
      out.cached_relations = cache.size();
      out.preprocessing_cached = cache.count(Provenance::Preprocessing);
      out.guessed_cached = cache.count(Provenance::GuessProve);
      if (lin.verified) {
        out.status = Status::Correct;
        out.total_seconds = total.seconds();
        return out;
      }
      spec = std::move(lin.spec);
      // A remainder free of gate variables is already decided.
      if (cfg.engine == Engine::Linear && !only_inputs_and_extensions(spec, enc.layout))
        return fail("linear extraction exhausted");
      stats.switched = cfg.engine == Engine::Hybrid;
      stats.switch_reason = lin.reason;
    }

    // Rewriting is tried under a swell limit first. Past it, a remainder
    // that is nonzero on some simulated pattern settles the verdict early.
    const bool decided = only_inputs_and_extensions(spec, enc.layout);
    std::optional<SimplifiedEncoding> simple;
    if (!decided) {
      sw = Stopwatch();
      simple = simplify_encoding(enc, aig);
      for (auto e : simple->eliminated) stats.eliminated_gates += e;
      stats.simplify.add(sw.seconds());
    }
    const CircuitEncoding& nl_enc = simple ? simple->enc : enc;
    MmPoly nf(enc.ring);
    sw = Stopwatch();
    try {
      nf = nonlinear_normal_form(spec, nl_enc, aig, &stats, std::min(cfg.swell_limit, cfg.term_limit));
    } catch (const ResourceError&) {
      if (cfg.swell_limit >= cfg.term_limit) throw;
      if (auto w = simulated_witness(spec, enc, aig, cfg.seed)) {
        stats.nonlinear_rewrite.add(sw.seconds());
        if (!violates_spec(problem, aig, *w)) return fail("counterexample failed validation");
        stats.simulated_witness = true;
        out.status = Status::Incorrect;
        out.witness = std::move(*w);
        out.total_seconds = total.seconds();
        return out;
      }
      nf = nonlinear_normal_form(spec, nl_enc, aig, &stats, cfg.term_limit);
    }
    stats.nonlinear_rewrite.add(sw.seconds());

    if (nf.is_zero()) {
      out.status = Status::Correct;
    } else {
      auto witness = extract_counterexample(nf, enc, aig, cfg.seed);
      if (!violates_spec(problem, aig, witness)) return fail("counterexample failed validation");
      out.status = Status::Incorrect;
      out.witness = std::move(witness);
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  out.total_seconds = total.seconds();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json phase_value(const PhaseTime& t) {
  if (!t.entered) return "-";
  return t.seconds;
}

nlohmann::json lane_average(const std::vector<double>& lanes, const PhaseTime& t) {
  if (!t.entered || lanes.empty()) return "-";
  double s = 0;
  for (double x : lanes) s += x;
  return s / static_cast<double>(lanes.size());
}

}  // namespace

nlohmann::json report_json(const Verdict& v, const Config& cfg) {
  using nlohmann::json;
  const RunStats& s = v.stats;
  json j;
  j["status"] = status_name(v.status);
  j["exit_code"] = exit_code(v.status);
  j["message"] = v.message;
  j["input"] = cfg.aig ? std::string("<memory>") : cfg.input_path;
  j["engine"] = engine_name(cfg.engine);
  j["seed"] = cfg.seed;
  j["threads"] = v.threads;
  j["primes"] = v.primes;
  j["sampler"] = cfg.sampler == SamplerKind::Weighted ? "weighted" : "uniform";
  j["phases"] = {
      {"encode", phase_value(v.encode)},
      {"preprocess", phase_value(s.preprocess)},
      {"extract", phase_value(s.extract)},
      {"sample", phase_value(s.sample)},
      {"guess", phase_value(s.guess)},
      {"prove", phase_value(s.prove)},
      {"repair", phase_value(s.repair)},
      {"linear_rewrite", phase_value(s.linear_rewrite)},
      {"simplify", phase_value(s.simplify)},
      {"nonlinear_rewrite", phase_value(s.nonlinear_rewrite)},
  };
  j["per_prime"] = {
      {"guess", lane_average(s.lane_guess, s.guess)},
      {"prove", lane_average(s.lane_prove, s.prove)},
      {"repair", lane_average(s.lane_repair, s.repair)},
  };
  j["counters"] = {
      {"preprocessing_relations", s.preprocessing_relations},
      {"cached_relations", v.cached_relations},
      {"guess_rounds", s.guess_rounds},
      {"relations_learned", s.relations_learned},
      {"candidates_tried", s.candidates_tried},
      {"prove_calls", s.prove_calls},
      {"sat_calls", s.sat_calls},
      {"excluded", s.excluded},
      {"discarded", s.discarded},
      {"repair_rounds", s.repair_rounds},
      {"reprojections", s.reprojections},
      {"resamples", s.resamples},
      {"escalations", s.escalations},
      {"failed_extractions", s.failed_extractions},
      {"linear_steps", s.linear_steps},
      {"nonlinear_steps", s.nonlinear_steps},
      {"eliminated_gates", s.eliminated_gates},
      {"max_terms", s.max_terms},
      {"simulated_witness", s.simulated_witness},
  };
  j["switched"] = s.switched;
  j["switch_reason"] = s.switch_reason;
  if (v.witness) {
    json w = json::object();
    for (std::size_t i = 0; i < v.witness->size(); ++i) w[v.input_names.at(i)] = (*v.witness)[i];
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  j["total_seconds"] = v.total_seconds;
  return j;
}

std::string report_table(const Verdict& v) {
  const RunStats& s = v.stats;
  std::ostringstream os;
  auto cell = [&](const char* name, const PhaseTime& t) {
    char buf[64];
    if (t.entered)
      std::snprintf(buf, sizeof buf, "%-18s %10.3f\n", name, t.seconds);
    else
      std::snprintf(buf, sizeof buf, "%-18s %10s\n", name, "-");
    os << buf;
  };
  auto lane = [&](const char* name, const std::vector<double>& lanes, const PhaseTime& t) {
    PhaseTime avg;
    if (t.entered && !lanes.empty()) {
      double sum = 0;
      for (double x : lanes) sum += x;
      avg.add(sum / static_cast<double>(lanes.size()));
    }
    cell(name, avg);
  };
  os << "status             " << status_name(v.status) << "\n";
  if (!v.message.empty()) os << "message            " << v.message << "\n";
  os << "primes             " << v.primes.size() << "\n";
  cell("encode", v.encode);
  cell("preprocess", s.preprocess);
  cell("extract", s.extract);
  cell("sample", s.sample);
  lane("guess/prime", s.lane_guess, s.guess);
  lane("prove/prime", s.lane_prove, s.prove);
  lane("repair/prime", s.lane_repair, s.repair);
  cell("linear rewrite", s.linear_rewrite);
  cell("simplify", s.simplify);
  cell("nonlinear rewrite", s.nonlinear_rewrite);
  os << "guess rounds       " << s.guess_rounds << "\n";
  os << "cached relations   " << v.cached_relations << "\n";
  os << "repair rounds      " << s.repair_rounds << "\n";
  os << "switched           " << (s.switched ? "yes" : "no") << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v.total_seconds);
  os << "total              " << buf << "\n";
  return os.str();
}

}  // namespace mmv
