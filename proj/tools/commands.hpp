#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace epsbisim::cli {

struct Options {
  std::string model;
  std::string model_b;
  std::string relation;
  std::string out;
  std::string format = "csv";
  std::string which = "exact,unif,erlangN,markov";
  std::string state;
  double eps = 0.0;
  double delta = 0.0;
  double theta = 0.0;
  double q = 1.0;
  double t = 1.0;
  double tmax = 10.0;
  double bound = 1.0;
  double tol = 1e-9;
  double confidence = 0.95;
  std::size_t steps = 100;
  std::size_t samples = 11;
  std::size_t n = 30;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  bool explain = false;
  bool renormalize = false;
};

// Each command writes its report to `out`, notes to `err`, and returns the
// process exit code.
int check_bisim(const Options& o, std::ostream& out, std::ostream& err);
int bounds(const Options& o, std::ostream& out, std::ostream& err);
int pareto(const Options& o, std::ostream& out, std::ostream& err);
int reward_reach(const Options& o, std::ostream& out, std::ostream& err);
int pair_uniformize(const Options& o, std::ostream& out, std::ostream& err);
int spectral_report(const Options& o, std::ostream& out, std::ostream& err);
int pn(const Options& o, std::ostream& out, std::ostream& err);
int simulate(const Options& o, std::ostream& out, std::ostream& err);

}  // namespace epsbisim::cli
