// Standalone DIMACS solver on the internal CDCL engine.
// Exit code 10 for SAT, 20 for UNSAT, 0 when unknown.
#include <fstream>
#include <iostream>
#include <sstream>

#include "mmverify/sat.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: mmsat <file.cnf>\n";
    return 1;
  }
  std::ifstream is(argv[1]);
  if (!is) {
    std::cerr << "mmsat: cannot read " << argv[1] << "\n";
    return 1;
  }
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    mmv::sat::Cnf cnf = mmv::sat::parse_dimacs(ss.str());
    mmv::sat::Result r = mmv::sat::solve_cnf(cnf);
    if (r.status == mmv::sat::Status::Unsat) {
      std::cout << "s UNSATISFIABLE\n";
      return 20;
    }
    if (r.status == mmv::sat::Status::Unknown) {
      std::cout << "s UNKNOWN\n";
      return 0;
    }
    std::cout << "s SATISFIABLE\nv";
    for (int v = 1; v <= cnf.num_vars; ++v) std::cout << ' ' << (r.value(v) ? v : -v);
    std::cout << " 0\n";
    return 10;
  } catch (const std::exception& e) {
    std::cerr << "mmsat: " << e.what() << "\n";
    return 1;
  }
}
