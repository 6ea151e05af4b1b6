#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmverify/rewrite.hpp"

namespace mmv {

enum class Engine { Hybrid, Linear, Nonlinear };
enum class Status { Correct, Incorrect, Error };

Engine parse_engine(const std::string& name);
std::string engine_name(Engine e);
std::string status_name(Status s);

struct Config {
  std::string input_path;
  std::optional<Aig> aig;  // used instead of input_path when set
  SpecOptions spec;
  Engine engine = Engine::Hybrid;
  unsigned threads = 0;  // 0: one per prime
  std::uint64_t seed = 1;
  SamplerKind sampler = SamplerKind::Weighted;
  unsigned sample_factor = 3;
  DepthSchedule depth;
  Backend backend = Backend::Auto;
  std::string sat_solver_path;  // selects the external backend
  double sat_timeout = 0;
  std::string keep_cnf_dir;
  std::string report_path;
  std::size_t swell_limit = 100'000;     // nonlinear terms before trying simulated witnesses
  std::size_t term_limit = 10'000'000;   // hard nonlinear guard
};

struct Verdict {
  Status status = Status::Error;
  std::optional<std::vector<std::uint8_t>> witness;  // by input position
  std::string message;

  std::vector<Residue> primes;
  unsigned threads = 0;
  PhaseTime encode;
  RunStats stats;
  std::size_t cached_relations = 0;
  std::size_t preprocessing_cached = 0;
  std::size_t guessed_cached = 0;
  double total_seconds = 0;
  std::vector<std::string> input_names;
};

/// encode, preprocess, linear phase, switch, simplify, nonlinear phase.
/// Incorrect verdicts carry a witness that was re-simulated against the original circuit.
Verdict verify(const Config& config);

int exit_code(Status s);
nlohmann::json report_json(const Verdict& v, const Config& config);
std::string report_table(const Verdict& v);

}  // namespace mmv
