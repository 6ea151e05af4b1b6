#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmv::sat {

class SatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// DIMACS-style literal: +v or -v for variable v >= 1.
using Lit = int;

struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<Lit>> clauses;

  int new_var() { return ++num_vars; }
  void add(std::vector<Lit> clause) { clauses.push_back(std::move(clause)); }
};

enum class Status { Sat, Unsat, Unknown };

struct Result {
  Status status = Status::Unknown;
  std::vector<std::uint8_t> model;  // index = variable, entry 0 unused
  bool value(int var) const { return model.at(static_cast<std::size_t>(var)) != 0; }
};

std::string write_dimacs(const Cnf& cnf);
/// Throws SatError on malformed input.
Cnf parse_dimacs(std::string_view text);
/// Parses "s SATISFIABLE" / "s UNSATISFIABLE" and "v" lines.
Result parse_solver_output(std::string_view text, int num_vars);

/// Conflict-driven clause learning with two watched literals, first-UIP
/// learning, activity-based branching, phase saving and Luby restarts.
/// Clauses may be added between calls to solve().
class Solver {
 public:
  Solver();
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  int new_var();
  int num_vars() const;
  void add_clause(const std::vector<Lit>& clause);
  void add_cnf(const Cnf& cnf);
  /// conflict_budget < 0: unlimited.
  Status solve(std::int64_t conflict_budget = -1);
  bool value(int var) const;
  std::vector<std::uint8_t> model() const;

  std::uint64_t conflicts() const;
  std::uint64_t decisions() const;

 private:
  struct Impl;
  Impl* impl_;
};

Result solve_cnf(const Cnf& cnf, std::int64_t conflict_budget = -1);

/// Runs `solver_path <cnf_path>`, killing it after `timeout_sec` (0: no limit).
/// Throws SatError when the solver cannot be started or gives no answer.
Result run_external(const std::string& solver_path, const std::string& cnf_path, int num_vars,
                    double timeout_sec = 0);

}  // namespace mmv::sat
