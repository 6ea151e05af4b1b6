#include "mmverify/sat.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>

namespace mmv::sat {

std::string write_dimacs(const Cnf& cnf) {
  std::ostringstream os;
  os << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const auto& c : cnf.clauses) {
    for (Lit l : c) os << l << ' ';
    os << "0\n";
  }
  return os.str();
}

Cnf parse_dimacs(std::string_view text) {
  Cnf cnf;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  std::size_t declared = 0;
  std::vector<Lit> clause;
  while (std::getline(in, line)) {
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == 'c') continue;
    if (line[start] == '%') break;
    if (line[start] == 'p') {
      std::istringstream h(line.substr(start));
      std::string p, fmt;
      long long v = -1, c = -1;
      if (!(h >> p >> fmt >> v >> c) || fmt != "cnf" || v < 0 || c < 0) throw SatError("malformed DIMACS header");
      cnf.num_vars = static_cast<int>(v);
      declared = static_cast<std::size_t>(c);
      header = true;
      continue;
    }
    if (!header) throw SatError("clause before DIMACS header");
    std::istringstream ls(line);
    long long x;
    while (ls >> x) {
      if (x == 0) {
        cnf.clauses.push_back(std::move(clause));
        clause.clear();
      } else {
        if (std::llabs(x) > cnf.num_vars) throw SatError("literal exceeds declared variable count");
        clause.push_back(static_cast<Lit>(x));
      }
    }
    if (!ls.eof()) throw SatError("malformed DIMACS clause line");
  }
  if (!header) throw SatError("missing DIMACS header");
  if (!clause.empty()) cnf.clauses.push_back(std::move(clause));
  if (cnf.clauses.size() != declared) throw SatError("clause count differs from header");
  return cnf;
}

Result parse_solver_output(std::string_view text, int num_vars) {
  Result r;
  std::istringstream in{std::string(text)};
  std::string line;
  bool answered = false;
  r.model.assign(static_cast<std::size_t>(num_vars) + 1, 0);
  while (std::getline(in, line)) {
    if (line.rfind("s ", 0) == 0) {
      answered = true;
      if (line.find("UNSATISFIABLE") != std::string::npos) r.status = Status::Unsat;
      else if (line.find("SATISFIABLE") != std::string::npos) r.status = Status::Sat;
      else r.status = Status::Unknown;
    } else if (line.rfind("v ", 0) == 0 || line == "v") {
      std::istringstream vs(line.substr(1));
      long long x;
      while (vs >> x) {
        if (x != 0 && std::llabs(x) <= num_vars) r.model[static_cast<std::size_t>(std::llabs(x))] = x > 0;
      }
    }
  }
  if (!answered) throw SatError("solver printed no status line");
  return r;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kNoReason = ~std::uint32_t{0};

inline int lit_var(int l) { return l >> 1; }
inline int lit_neg(int l) { return l ^ 1; }

double luby(double y, int x) {
  int size = 1, seq = 0;
  for (; size < x + 1; seq++, size = 2 * size + 1) {
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

struct Solver::Impl {
  struct Clause {
    std::vector<int> lits;
    bool learnt = false;
    bool deleted = false;
    double activity = 0;
  };
  struct Watcher {
    std::uint32_t cref;
    int blocker;
  };

  std::vector<Clause> clauses;
  std::vector<std::vector<Watcher>> watches;  // by literal: clauses watching it
  std::vector<std::int8_t> assigns;           // by var: -1, 0, 1
  std::vector<std::uint8_t> polarity;         // saved phase
  std::vector<int> level;
  std::vector<std::uint32_t> reason;
  std::vector<double> activity;
  std::vector<std::uint8_t> seen;
  std::vector<int> trail;
  std::vector<std::size_t> trail_lim;
  std::size_t qhead = 0;
  bool unsat = false;
  double var_inc = 1, cla_inc = 1;
  std::size_t num_learnts = 0;
  double max_learnts = 0;
  std::uint64_t n_conflicts = 0, n_decisions = 0;
  std::vector<std::uint8_t> last_model;

  // activity heap
  std::vector<int> heap, heap_pos;

  int nvars() const { return static_cast<int>(assigns.size()); }
  int decision_level() const { return static_cast<int>(trail_lim.size()); }
  int value(int l) const {
    int a = assigns[static_cast<std::size_t>(lit_var(l))];
    return a < 0 ? -1 : (a ^ (l & 1));
  }

  bool heap_less(int a, int b) const { return activity[a] > activity[b]; }
  void heap_up(std::size_t i) {
    int v = heap[i];
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!heap_less(v, heap[parent])) break;
      heap[i] = heap[parent];
      heap_pos[heap[i]] = static_cast<int>(i);
      i = parent;
    }
    heap[i] = v;
    heap_pos[v] = static_cast<int>(i);
  }
  void heap_down(std::size_t i) {
    int v = heap[i];
    while (true) {
      std::size_t child = 2 * i + 1;
      if (child >= heap.size()) break;
      if (child + 1 < heap.size() && heap_less(heap[child + 1], heap[child])) ++child;
      if (!heap_less(heap[child], v)) break;
      heap[i] = heap[child];
      heap_pos[heap[i]] = static_cast<int>(i);
      i = child;
    }
    heap[i] = v;
    heap_pos[v] = static_cast<int>(i);
  }
  void heap_insert(int v) {
    if (heap_pos[v] >= 0) return;
    heap.push_back(v);
    heap_pos[v] = static_cast<int>(heap.size() - 1);
    heap_up(heap.size() - 1);
  }
  int heap_pop() {
    int top = heap[0];
    heap_pos[top] = -1;
    int last = heap.back();
    heap.pop_back();
    if (!heap.empty()) {
      heap[0] = last;
      heap_pos[last] = 0;
      heap_down(0);
    }
    return top;
  }

  int new_var() {
    int v = nvars();
    assigns.push_back(-1);
    polarity.push_back(0);
    level.push_back(0);
    reason.push_back(kNoReason);
    activity.push_back(0);
    seen.push_back(0);
    heap_pos.push_back(-1);
    watches.emplace_back();
    watches.emplace_back();
    heap_insert(v);
    return v;
  }

  void enqueue(int l, std::uint32_t from) {
    int v = lit_var(l);
    assigns[static_cast<std::size_t>(v)] = static_cast<std::int8_t>((l & 1) ^ 1);
    level[v] = decision_level();
    reason[v] = from;
    trail.push_back(l);
  }

  void attach(std::uint32_t cref) {
    const auto& c = clauses[cref].lits;
    watches[static_cast<std::size_t>(c[0])].push_back({cref, c[1]});
    watches[static_cast<std::size_t>(c[1])].push_back({cref, c[0]});
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail.size(); i > trail_lim[static_cast<std::size_t>(lvl)]; --i) {
      int v = lit_var(trail[i - 1]);
      polarity[v] = static_cast<std::uint8_t>(assigns[v]);
      assigns[v] = -1;
      reason[v] = kNoReason;
      heap_insert(v);
    }
    trail.resize(trail_lim[static_cast<std::size_t>(lvl)]);
    trail_lim.resize(static_cast<std::size_t>(lvl));
    qhead = trail.size();
  }

  std::uint32_t propagate() {
    std::uint32_t confl = kNoReason;
    while (qhead < trail.size()) {
      int p = trail[qhead++];
      int false_lit = lit_neg(p);
      auto& ws = watches[static_cast<std::size_t>(false_lit)];
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        Watcher w = ws[i];
        if (value(w.blocker) == 1) {
          ws[j++] = ws[i++];
          continue;
        }
        auto& c = clauses[w.cref].lits;
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        ++i;
        int first = c[0];
        if (first != w.blocker && value(first) == 1) {
          ws[j++] = {w.cref, first};
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != 0) {
            std::swap(c[1], c[k]);
            watches[static_cast<std::size_t>(c[1])].push_back({w.cref, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.cref, first};
        if (value(first) == 0) {
          confl = w.cref;
          qhead = trail.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != kNoReason) break;
    }
    return confl;
  }

  void bump_var(int v) {
    if ((activity[v] += var_inc) > 1e100) {
      for (auto& a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    if (heap_pos[v] >= 0) heap_up(static_cast<std::size_t>(heap_pos[v]));
  }
  void bump_clause(Clause& c) {
    if ((c.activity += cla_inc) > 1e20) {
      for (auto& cl : clauses)
        if (cl.learnt) cl.activity *= 1e-20;
      cla_inc *= 1e-20;
    }
  }

  bool redundant(int l) const {
    std::uint32_t r = reason[lit_var(l)];
    if (r == kNoReason) return false;
    const auto& c = clauses[r].lits;
    for (std::size_t k = 1; k < c.size(); ++k) {
      int v = lit_var(c[k]);
      if (!seen[v] && level[v] > 0) return false;
    }
    return true;
  }

  void analyze(std::uint32_t confl, std::vector<int>& learnt, int& bt_level) {
    learnt.assign(1, -1);
    int path = 0, p = -1;
    std::size_t index = trail.size();
    do {
      Clause& c = clauses[confl];
      if (c.learnt) bump_clause(c);
      for (std::size_t k = (p == -1 ? 0 : 1); k < c.lits.size(); ++k) {
        int q = c.lits[k];
        int v = lit_var(q);
        if (!seen[v] && level[v] > 0) {
          bump_var(v);
          seen[v] = 1;
          if (level[v] >= decision_level()) ++path;
          else learnt.push_back(q);
        }
      }
      while (!seen[lit_var(trail[--index])]) {
      }
      p = trail[index];
      confl = reason[lit_var(p)];
      seen[lit_var(p)] = 0;
      --path;
    } while (path > 0);
    learnt[0] = lit_neg(p);

    std::vector<int> all(learnt.begin() + 1, learnt.end());
    std::size_t out = 1;
    for (std::size_t k = 1; k < learnt.size(); ++k)
      if (!redundant(learnt[k])) learnt[out++] = learnt[k];
    learnt.resize(out);
    for (int l : all) seen[lit_var(l)] = 0;

    bt_level = 0;
    if (learnt.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t k = 2; k < learnt.size(); ++k)
        if (level[lit_var(learnt[k])] > level[lit_var(learnt[max_i])]) max_i = k;
      std::swap(learnt[1], learnt[max_i]);
      bt_level = level[lit_var(learnt[1])];
    }
  }

  bool locked(std::uint32_t cref) const {
    const auto& c = clauses[cref].lits;
    int v = lit_var(c[0]);
    return reason[v] == cref && value(c[0]) == 1;
  }

  void reduce_db() {
    std::vector<std::uint32_t> learnts;
    for (std::uint32_t i = 0; i < clauses.size(); ++i)
      if (clauses[i].learnt && !clauses[i].deleted && clauses[i].lits.size() > 2) learnts.push_back(i);
    std::sort(learnts.begin(), learnts.end(),
              [&](std::uint32_t a, std::uint32_t b) { return clauses[a].activity < clauses[b].activity; });
    for (std::size_t k = 0; k < learnts.size() / 2; ++k) {
      if (locked(learnts[k])) continue;
      clauses[learnts[k]].deleted = true;
      clauses[learnts[k]].lits.clear();
      clauses[learnts[k]].lits.shrink_to_fit();
      --num_learnts;
    }
    for (auto& ws : watches)
      ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watcher& w) { return clauses[w.cref].deleted; }),
               ws.end());
  }

  void add_clause(const std::vector<Lit>& ext) {
    if (unsat) return;
    cancel_until(0);
    std::vector<int> c;
    for (Lit x : ext) {
      if (x == 0) throw SatError("zero literal in clause");
      int v = std::abs(x) - 1;
      while (v >= nvars()) new_var();
      c.push_back(2 * v + (x < 0 ? 1 : 0));
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    std::vector<int> kept;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k + 1 < c.size() && c[k + 1] == lit_neg(c[k])) return;  // tautology
      int val = value(c[k]);
      if (val == 1) return;
      if (val == 0) continue;
      kept.push_back(c[k]);
    }
    if (kept.empty()) {
      unsat = true;
      return;
    }
    if (kept.size() == 1) {
      enqueue(kept[0], kNoReason);
      if (propagate() != kNoReason) unsat = true;
      return;
    }
    clauses.push_back({std::move(kept), false, false, 0});
    attach(static_cast<std::uint32_t>(clauses.size() - 1));
  }

  int pick_branch() {
    while (!heap.empty()) {
      int v = heap_pop();
      if (assigns[v] < 0) return v;
    }
    return -1;
  }

  Status search(std::int64_t conflicts_allowed, std::int64_t& budget) {
    std::vector<int> learnt;
    std::int64_t local = 0;
    while (true) {
      std::uint32_t confl = propagate();
      if (confl != kNoReason) {
        ++n_conflicts;
        ++local;
        if (budget > 0) --budget;
        if (decision_level() == 0) return Status::Unsat;
        int bt;
        analyze(confl, learnt, bt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          clauses.push_back({learnt, true, false, 0});
          auto cref = static_cast<std::uint32_t>(clauses.size() - 1);
          attach(cref);
          bump_clause(clauses[cref]);
          ++num_learnts;
          enqueue(learnt[0], cref);
        }
        var_inc /= 0.95;
        cla_inc /= 0.999;
        continue;
      }
      if (budget == 0) return Status::Unknown;
      if (local >= conflicts_allowed) {
        cancel_until(0);
        return Status::Unknown;
      }
      if (static_cast<double>(num_learnts) - static_cast<double>(trail.size()) >= max_learnts) {
        reduce_db();
        max_learnts *= 1.1;
      }
      int v = pick_branch();
      if (v < 0) return Status::Sat;
      ++n_decisions;
      trail_lim.push_back(trail.size());
      enqueue(2 * v + (polarity[v] ? 0 : 1), kNoReason);
    }
  }

  Status solve(std::int64_t budget) {
    if (unsat) return Status::Unsat;
    cancel_until(0);
    if (propagate() != kNoReason) {
      unsat = true;
      return Status::Unsat;
    }
    max_learnts = std::max(1000.0, static_cast<double>(clauses.size()) / 3.0);
    for (int restart = 0;; ++restart) {
      std::int64_t allowed = static_cast<std::int64_t>(luby(2, restart) * 100);
      Status s = search(allowed, budget);
      if (s == Status::Sat) {
        last_model.assign(static_cast<std::size_t>(nvars()) + 1, 0);
        for (int v = 0; v < nvars(); ++v) last_model[static_cast<std::size_t>(v) + 1] = assigns[v] == 1;
        cancel_until(0);
        return s;
      }
      if (s == Status::Unsat) {
        unsat = true;
        return s;
      }
      if (budget == 0) {
        cancel_until(0);
        return Status::Unknown;
      }
    }
  }
};

Solver::Solver() : impl_(new Impl) {}
Solver::~Solver() { delete impl_; }
int Solver::new_var() { return impl_->new_var() + 1; }
int Solver::num_vars() const { return impl_->nvars(); }
void Solver::add_clause(const std::vector<Lit>& clause) { impl_->add_clause(clause); }
void Solver::add_cnf(const Cnf& cnf) {
  while (impl_->nvars() < cnf.num_vars) impl_->new_var();
  for (const auto& c : cnf.clauses) impl_->add_clause(c);
}
Status Solver::solve(std::int64_t conflict_budget) { return impl_->solve(conflict_budget < 0 ? -1 : conflict_budget); }
bool Solver::value(int var) const { return impl_->last_model.at(static_cast<std::size_t>(var)) != 0; }
std::vector<std::uint8_t> Solver::model() const { return impl_->last_model; }
std::uint64_t Solver::conflicts() const { return impl_->n_conflicts; }
std::uint64_t Solver::decisions() const { return impl_->n_decisions; }

Result solve_cnf(const Cnf& cnf, std::int64_t conflict_budget) {
  Solver s;
  s.add_cnf(cnf);
  Result r;
  r.status = s.solve(conflict_budget);
  if (r.status == Status::Sat) {
    r.model = s.model();
    r.model.resize(static_cast<std::size_t>(cnf.num_vars) + 1, 0);
  }
  return r;
}

// ---------------------------------------------------------------------------

Result run_external(const std::string& solver_path, const std::string& cnf_path, int num_vars, double timeout_sec) {
  int fds[2];
  if (pipe(fds) != 0) throw SatError(std::string("pipe: ") + std::strerror(errno));
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw SatError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl(solver_path.c_str(), solver_path.c_str(), cnf_path.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);
  std::string out;
  char buf[4096];
  auto start = std::chrono::steady_clock::now();
  bool timed_out = false;
  while (true) {
    int wait_ms = -1;
    if (timeout_sec > 0) {
      double left = timeout_sec - std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (left <= 0) {
        timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(left * 1000) + 1;
    }
    pollfd pfd{fds[0], POLLIN, 0};
    int rc = poll(&pfd, 1, wait_ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) continue;
    ssize_t n = read(fds[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  close(fds[0]);
  if (timed_out) kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  if (timed_out) return Result{};
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127) throw SatError("cannot run SAT solver '" + solver_path + "'");
  if (WIFSIGNALED(status)) throw SatError("SAT solver '" + solver_path + "' crashed");
  Result r = parse_solver_output(out, num_vars);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if ((r.status == Status::Sat && code != 10 && code != 0) || (r.status == Status::Unsat && code != 20 && code != 0))
    throw SatError("SAT solver exit status " + std::to_string(code) + " contradicts its answer");
  return r;
}

}  // namespace mmv::sat
