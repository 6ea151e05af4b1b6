#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "mmverify/benchgen.hpp"
#include "mmverify/orchestrator.hpp"

namespace {

int run_verify(const mmv::Config& cfg, bool print_table) {
  mmv::Verdict v = mmv::verify(cfg);
  switch (v.status) {
    case mmv::Status::Correct: std::cout << "CORRECT\n"; break;
    case mmv::Status::Incorrect:
      std::cout << "INCORRECT\n";
      for (std::size_t i = 0; i < v.witness->size(); ++i)
        std::cout << v.input_names[i] << "=" << int((*v.witness)[i]) << "\n";
      break;
    case mmv::Status::Error: std::cerr << "error: " << v.message << "\n"; break;
  }
  if (print_table) std::cerr << mmv::report_table(v);
  if (!cfg.report_path.empty()) {
    std::ofstream os(cfg.report_path);
    if (!os) {
      std::cerr << "error: cannot write " << cfg.report_path << "\n";
      return 2;
    }
    os << mmv::report_json(v, cfg).dump(2) << "\n";
  }
  return mmv::exit_code(v.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multimodular verifier for AIG multipliers"};
  app.require_subcommand(1);

  mmv::Config cfg;
  std::string mode = "unsigned", engine = "hybrid", sampler = "weighted", custom_file;
  bool keep_cnf = false, table = false;
  std::string cnf_dir = "cnf";
  auto* verify = app.add_subcommand("verify", "verify a multiplier circuit");
  verify->add_option("input", cfg.input_path, "AIGER file (.aag or .aig)")->required();
  verify->add_option("--mode", mode, "unsigned, signed or custom")
      ->check(CLI::IsMember({"unsigned", "signed", "custom"}));
  verify->add_option("--spec", custom_file, "specification polynomial file for custom mode");
  verify->add_option("--engine", engine, "hybrid, linear or nonlinear")
      ->check(CLI::IsMember({"hybrid", "linear", "nonlinear", "linear-only", "nonlinear-only"}));
  verify->add_option("--prime-bits", cfg.spec.prime_bits, "prime width in bits")->check(CLI::Range(8, 31));
  verify->add_option("--threads", cfg.threads, "worker threads (default: one per prime)")->check(CLI::PositiveNumber);
  verify->add_option("--seed", cfg.seed, "random seed");
  verify->add_option("--sat-solver", cfg.sat_solver_path, "external DIMACS solver");
  verify->add_option("--sat-timeout", cfg.sat_timeout, "seconds per external solver call");
  verify->add_option("--report", cfg.report_path, "write a JSON report");
  verify->add_flag("--keep-cnf", keep_cnf, "keep the DIMACS files of every proof");
  verify->add_option("--cnf-dir", cnf_dir, "directory for --keep-cnf");
  verify->add_option("--sampler", sampler, "weighted or uniform")->check(CLI::IsMember({"weighted", "uniform"}));
  verify->add_option("--sample-factor", cfg.sample_factor, "samples per subcircuit node")->check(CLI::PositiveNumber);
  verify->add_option("--depth", cfg.depth.initial, "initial extraction depth");
  verify->add_option("--depth-step", cfg.depth.increment, "depth increment per escalation");
  verify->add_option("--escalations", cfg.depth.max_escalations, "escalations before switching");
  verify->add_option("--pin-order", cfg.spec.pin_order, "auto, sequential or interleaved")
      ->check(CLI::IsMember({"auto", "sequential", "interleaved"}));
  verify->add_flag("--table", table, "print the phase table to stderr");

  mmv::GenSpec gs;
  std::string fsa = "rc", fault, out_path;
  std::uint64_t fault_seed = 1;
  auto* gen = app.add_subcommand("gen", "generate a multiplier");
  gen->add_option("--bits", gs.n_bits, "operand width")->required()->check(CLI::PositiveNumber);
  gen->add_option("--fsa", fsa, "rc or cl")->check(CLI::IsMember({"rc", "cl"}));
  gen->add_flag("--signed", gs.is_signed, "two's complement operands");
  gen->add_option("--fault", fault, "flip-polarity, swap-children or constant-gate")
      ->check(CLI::IsMember({"flip-polarity", "swap-children", "constant-gate"}));
  gen->add_option("--fault-seed", fault_seed, "fault selection seed");
  gen->add_option("--and-chain", gs.and_chain, "AND chain depth on one partial product");
  gen->add_option("-o,--output", out_path, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      gs.fsa = fsa == "cl" ? mmv::FsaKind::CarryLookahead : mmv::FsaKind::RippleCarry;
      if (!fault.empty()) gs.fault = mmv::Fault{mmv::parse_fault_kind(fault), fault_seed};
      std::string text = mmv::gen_multiplier(gs);
      if (out_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream os(out_path);
        if (!(os << text)) {
          std::cerr << "error: cannot write " << out_path << "\n";
          return 2;
        }
      }
      return 0;
    }
    cfg.spec.mode = mode == "signed" ? mmv::SpecMode::Signed : mode == "custom" ? mmv::SpecMode::Custom : mmv::SpecMode::Unsigned;
    if (!custom_file.empty()) {
      std::ifstream is(custom_file);
      if (!is) {
        std::cerr << "error: cannot read " << custom_file << "\n";
        return 2;
      }
      cfg.spec.custom_text.assign(std::istreambuf_iterator<char>(is), {});
    }
    cfg.engine = mmv::parse_engine(engine);
    cfg.sampler = sampler == "uniform" ? mmv::SamplerKind::Uniform : mmv::SamplerKind::Weighted;
    if (keep_cnf) cfg.keep_cnf_dir = cnf_dir;
    return run_verify(cfg, table);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
