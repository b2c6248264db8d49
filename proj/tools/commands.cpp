#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "epsbisim/bisim.hpp"
#include "epsbisim/curve.hpp"
#include "epsbisim/erlang.hpp"
#include "epsbisim/model_io.hpp"
#include "epsbisim/pairuniform.hpp"
#include "epsbisim/rewards.hpp"
#include "epsbisim/spectral.hpp"
#include "epsbisim/transient.hpp"

namespace epsbisim::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

Ctmc load(const std::string& path, const Options& o) {
  if (path.empty()) throw Error(ErrorKind::InvalidArgument, "a model file is required");
  return load_model(path, LoadOptions{o.renormalize});
}

std::size_t state_or_initial(const Ctmc& m, const std::string& id) {
  return id.empty() ? m.initial() : m.chain.require_index(id);
}

void emit_json(std::ostream& out, const ordered_json& doc) { out << doc.dump(2) << "\n"; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ordered_json complex_json(Complex v) { return {{"re", v.real()}, {"im", v.imag()}}; }

// Why an unrelated same-sized pair is not in the final relation.
ordered_json explain_pairs(const Ctmc& sum, const PairRelation& r) {
  ordered_json list = ordered_json::array();
  for (std::size_t i = 0; i < sum.size(); ++i) {
    for (std::size_t j = i + 1; j < sum.size(); ++j) {
      if (r.related(i, j)) continue;
      ordered_json e;
      e["pair"] = {sum.chain.ids[i], sum.chain.ids[j]};
      if (sum.chain.labels[i] != sum.chain.labels[j]) {
        e["condition"] = "label";
      } else if (sum.rewards && (*sum.rewards)(i) != (*sum.rewards)(j)) {
        e["condition"] = "reward";
      } else if (!locally_compatible(sum, i, j, r.delta)) {
        e["condition"] = "delta";
        e["log_rate_gap"] = std::abs(std::log(sum.E(i)) - std::log(sum.E(j)));
      } else {
        e["condition"] = "epsilon";
        e["related_flow"] = std::min(related_flow(sum.chain, r, i, j), related_flow(sum.chain, r, j, i));
        e["required"] = 1.0 - r.eps;
      }
      list.push_back(e);
    }
  }
  return list;
}

}  // namespace

int check_bisim(const Options& o, std::ostream& out, std::ostream&) {
  const Ctmc a = load(o.model, o);
  const bool pair = !o.model_b.empty();
  const Ctmc sum = pair ? direct_sum(a, load(o.model_b, o)) : a;
  const PairRelation r = epsilon_delta_bisim(sum, o.eps, o.delta);
  ordered_json doc;
  doc["relation"] = relation_to_json(r, sum.chain.ids);
  bool related = true;
  if (pair) {
    related = r.related(a.initial(), a.size() + load(o.model_b, o).initial());
    doc["initial_related"] = related;
  }
  if (o.explain) doc["unrelated"] = explain_pairs(sum, r);
  emit_json(out, doc);
  return related ? 0 : 1;
}

int bounds(const Options& o, std::ostream& out, std::ostream& err) {
  const Ctmc m = load(o.model, o);
  const auto grid = linear_grid(o.tmax, o.steps);
  BoundCurve curve;
  curve.t = grid;
  std::optional<CombinedBound> combined;
  auto get_combined = [&]() -> const CombinedBound& {
    if (!combined) {
      combined = combined_bound(m, o.delta, grid, o.tol);
      for (const auto& w : combined->warnings) err << "warning: " << w << "\n";
    }
    return *combined;
  };
  for (const auto& name : split_list(o.which)) {
    try {
      std::vector<double> col;
      if (name == "exact") {
        col = diff_curve(m, std::exp(o.delta), grid, o.tol);
      } else if (name == "unif") {
        for (double t : grid) col.push_back(uniformization_bound(o.eps, o.delta, max_rate(m), t));
      } else if (name == "erlangN") {
        const double rate = require_uniform_rate(m);
        for (double t : grid) col.push_back(erlang_N_bound(rate * t, o.delta));
      } else if (name == "markov") {
        for (double t : grid) col.push_back(markov_bound(m, o.delta, t, o.tol));
      } else if (name == "series") {
        for (double t : grid) col.push_back(exact_diff_series(m, o.delta, t, o.tol));
      } else if (name == "diag") {
        col = diag_bound(m, o.delta, grid, o.tol);
      } else if (name == "jordan") {
        col = jordan_bound(m, o.delta, grid, o.tol);
      } else if (name == "spectral") {
        col = get_combined().spectral;
        if (col.empty()) throw Error(ErrorKind::NotApplicable, "no spectral bound applies");
      } else if (name == "combined") {
        col = get_combined().combined;
      } else {
        throw Error(ErrorKind::InvalidArgument, "unknown bound '" + name + "'");
      }
      curve.add(name, col);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::Parse) throw;
      err << "note: " << name << " left empty: " << e.what() << "\n";
      curve.add(name, std::vector<std::optional<double>>(grid.size()));
    }
  }
  if (o.format == "json") {
    emit_json(out, curve_to_json(curve));
  } else {
    write_csv(out, curve);
  }
  return 0;
}

int pareto(const Options& o, std::ostream& out, std::ostream&) {
  const ParetoRegion region = pareto_region(o.theta, o.q, o.t);
  BoundCurve table;
  std::vector<double> deltas, epss, values, ok;
  const double dmax = region.delta_max(0.0);
  const std::size_t samples = (o.theta == 0.0 || o.samples < 2) ? 1 : o.samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const double d = samples == 1 ? 0.0 : dmax * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double e = region.eps_max(d);
    const double b = uniformization_bound(e, d, o.q, o.t);
    deltas.push_back(d);
    epss.push_back(e);
    values.push_back(b);
    ok.push_back(b <= o.theta + 1e-12 ? 1.0 : 0.0);
  }
  out << "delta,eps,bound,ok\n";
  for (std::size_t i = 0; i < samples; ++i) {
    out << format_number(deltas[i]) << "," << format_number(epss[i]) << "," << format_number(values[i]) << ","
        << (ok[i] != 0.0 ? 1 : 0) << "\n";
  }
  return 0;
}

int reward_reach(const Options& o, std::ostream& out, std::ostream&) {
  const Ctmc m = load(o.model, o);
  const std::size_t s = state_or_initial(m, o.state);
  ordered_json doc;
  doc["state"] = m.chain.ids[s];
  doc["bound"] = o.bound;
  doc["probability"] = epsbisim::reward_reach(m, s, o.bound, o.tol);
  emit_json(out, doc);
  return 0;
}

int pair_uniformize(const Options& o, std::ostream& out, std::ostream& err) {
  const Ctmc a = load(o.model, o);
  const Ctmc b = load(o.model_b, o);
  if (o.relation.empty()) throw Error(ErrorKind::InvalidArgument, "--relation is required");
  std::ifstream in(o.relation);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + o.relation);
  nlohmann::json rdoc;
  try {
    in >> rdoc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  const Ctmc sum = direct_sum(a, b);
  const PairRelation r = relation_from_json(rdoc, sum.chain.ids);
  const PairUniformization pu = uniformize_pair(a, b, r, o.delta);
  for (const auto& w : pu.warnings) err << "warning: " << w << "\n";
  ordered_json doc;
  doc["q_m"] = pu.q_m;
  doc["q_n"] = pu.q_n;
  doc["relation_holds"] = pu.recheck.ok;
  doc["ordering_checked"] = pu.ordering_checked;
  doc["ordering_holds"] = pu.ordering_holds;
  doc["warnings"] = pu.warnings;
  doc["m_prime"] = model_to_json(pu.m_prime);
  doc["n_prime"] = model_to_json(pu.n_prime);
  emit_json(out, doc);
  return pu.recheck.ok && (!pu.ordering_checked || pu.ordering_holds) ? 0 : 1;
}

int spectral_report(const Options& o, std::ostream& out, std::ostream&) {
  const Ctmc m = load(o.model, o);
  const SpectralData sd = decompose(m.chain);
  ordered_json doc;
  doc["kind"] = sd.kind == DecompositionKind::Diagonalizable ? "diagonalizable" : "jordan";
  doc["eigenvalues"] = ordered_json::array();
  for (auto v : sd.eigenvalues) doc["eigenvalues"].push_back(complex_json(v));
  doc["aP"] = sd.aP;
  doc["lambda_modulus"] = std::abs(sd.lambda);
  doc["z"] = sd.z;
  doc["blocks"] = ordered_json::array();
  for (const auto& b : sd.blocks) {
    ordered_json e = complex_json(b.eigenvalue);
    e["size"] = b.size;
    doc["blocks"].push_back(e);
  }
  doc["residual"] = sd.residual;
  doc["condition"] = sd.condition;
  if (sd.kind == DecompositionKind::Diagonalizable) {
    const DiagConstants dc = diag_constants(sd);
    doc["diag"] = {{"C", dc.C}, {"factor", dc.factor}};
  }
  const JordanConstants jc = jordan_constants(sd);
  doc["jordan"] = {{"C", jc.C}, {"R", jc.R}, {"r", jc.r}};
  emit_json(out, doc);
  return 0;
}

int pn(const Options& o, std::ostream& out, std::ostream&) {
  const Ctmc m = load(o.model, o);
  const SpectralData sd = decompose(m.chain);
  const HitStepDistribution h = hit_exact_steps(m, o.n);
  out << "n,oracle,formula,abs_error\n";
  for (std::size_t k = 1; k <= o.n; ++k) {
    const double f = sd.kind == DecompositionKind::Diagonalizable ? pn_diag(sd, k - 1) : pn_jordan(sd, k - 1);
    out << k << "," << format_number(h.probs[k - 1]) << "," << format_number(f) << ","
        << format_number(std::abs(f - h.probs[k - 1])) << "\n";
  }
  return 0;
}

int simulate(const Options& o, std::ostream& out, std::ostream&) {
  const Ctmc m = load(o.model, o);
  const std::size_t s = state_or_initial(m, o.state);
  const SimulationResult r = simulate_paths(m, o.paths, o.t, o.seed, o.confidence, s);
  ordered_json doc;
  doc["state"] = m.chain.ids[s];
  doc["t"] = o.t;
  doc["paths"] = r.paths;
  doc["hits"] = r.hits;
  doc["estimate"] = r.estimate;
  doc["ci"] = {r.ci.lo, r.ci.hi};
  doc["timed_reach"] = timed_reach(m, s, o.t, o.tol);
  emit_json(out, doc);
  return 0;
}

}  // namespace epsbisim::cli
