#include <fstream>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "epsbisim/error.hpp"
#include "json.hpp"

namespace {

constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace epsbisim;
  cli::Options o;
  CLI::App app{"Approximate bisimulation and timed reachability error bounds for CTMCs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  auto model = [&](CLI::App* sub) { sub->add_option("-m,--model,--model-a", o.model, "model JSON")->required(); };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->add_flag("--renormalize", o.renormalize, "rescale rows that do not sum to 1");
    sub->add_option("--tol", o.tol, "numerical tolerance");
  };

  auto* check = app.add_subcommand("check-bisim", "compute the largest (eps, delta)-bisimulation");
  model(check);
  common(check);
  check->add_option("--model-b", o.model_b, "second model; the initial states are compared");
  check->add_option("--eps", o.eps)->check(CLI::Range(0.0, 1.0));
  check->add_option("--delta", o.delta)->check(CLI::NonNegativeNumber);
  check->add_flag("--explain", o.explain, "list why unrelated pairs fail");

  auto* bounds = app.add_subcommand("bounds", "error bound curves over a time grid");
  model(bounds);
  common(bounds);
  bounds->add_option("--eps", o.eps)->check(CLI::Range(0.0, 1.0));
  bounds->add_option("--delta", o.delta)->check(CLI::NonNegativeNumber);
  bounds->add_option("--tmax", o.tmax)->check(CLI::NonNegativeNumber);
  bounds->add_option("--steps", o.steps);
  bounds->add_option("--which", o.which,
                     "comma list of exact, unif, erlangN, markov, series, diag, jordan, spectral, combined");
  bounds->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));

  auto* par = app.add_subcommand("pareto", "(eps, delta) frontier of the uniformization bound");
  common(par);
  par->add_option("--theta", o.theta)->required();
  par->add_option("--q", o.q);
  par->add_option("--t", o.t)->required();
  par->add_option("--samples", o.samples);

  auto* rr = app.add_subcommand("reward-reach", "reward-bounded reachability");
  model(rr);
  common(rr);
  rr->add_option("--bound", o.bound, "reward bound")->required()->check(CLI::NonNegativeNumber);
  rr->add_option("--state", o.state, "start state id (default initial)");

  auto* pu = app.add_subcommand("pair-uniformize", "uniformize a (0, delta)-bisimilar pair");
  model(pu);
  common(pu);
  pu->add_option("--model-b", o.model_b)->required();
  pu->add_option("--relation", o.relation)->required();
  pu->add_option("--delta", o.delta)->required()->check(CLI::NonNegativeNumber);

  auto* sr = app.add_subcommand("spectral-report", "eigen or Jordan decomposition summary");
  model(sr);
  common(sr);

  auto* pn = app.add_subcommand("pn", "hit probabilities p_n: matrix powers against the spectral formula");
  model(pn);
  common(pn);
  pn->add_option("--n", o.n, "largest n");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of timed reachability");
  model(sim);
  common(sim);
  sim->add_option("--t", o.t)->check(CLI::NonNegativeNumber);
  sim->add_option("--paths", o.paths);
  sim->add_option("--seed", o.seed);
  sim->add_option("--confidence", o.confidence)->check(CLI::Range(0.0, 1.0));
  sim->add_option("--state", o.state);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  const std::map<CLI::App*, std::function<int(const cli::Options&, std::ostream&, std::ostream&)>> table = {
      {check, cli::check_bisim},      {bounds, cli::bounds}, {par, cli::pareto},
      {rr, cli::reward_reach},        {pu, cli::pair_uniformize},
      {sr, cli::spectral_report},     {pn, cli::pn},         {sim, cli::simulate},
  };
  try {
    std::ofstream file;
    if (!o.out.empty()) {
      file.open(o.out);
      if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + o.out);
    }
    std::ostream& out = o.out.empty() ? std::cout : file;
    for (const auto& [sub, run] : table) {
      if (sub->parsed()) return run(o, out, std::cerr);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.kind()) ? kNumericalError : kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
