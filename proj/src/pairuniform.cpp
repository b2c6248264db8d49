#include "epsbisim/pairuniform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "epsbisim/transient.hpp"

namespace epsbisim {

namespace {

constexpr double kOrderingSlack = 1e-9;

}  // namespace

PairUniformization uniformize_pair(const Ctmc& m, const Ctmc& n, const PairRelation& r_in, double delta,
                                   const std::vector<double>& grid) {
  if (!(delta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "need delta >= 0");
  const std::size_t nm = m.size();
  const Ctmc sum = direct_sum(m, n);
  if (r_in.size() != sum.size()) throw Error(ErrorKind::InvalidArgument, "relation size does not match M + N");
  if (!r_in.is_transitive()) throw Error(ErrorKind::NotTransitive, "relation is not transitive");
  PairRelation r = r_in;
  r.eps = 0.0;
  r.delta = delta;
  const BisimCheck before = is_bisimulation(sum, r);
  if (!before.ok) {
    throw Error(ErrorKind::NotZeroDeltaBisim, "relation fails the " + before.condition + " condition at (" +
                                                  sum.chain.ids[before.pair->first] + ", " +
                                                  sum.chain.ids[before.pair->second] + ")");
  }

  const double up = std::exp(delta);
  Vector em(m.size()), en(n.size());
  double q = 0.0;
  for (const auto& block : partition_of(r).blocks) {
    double m_min = std::numeric_limits<double>::infinity();
    double n_max = 0.0;
    for (auto s : block) {
      if (s < nm) {
        m_min = std::min(m_min, m.E(s));
      } else {
        n_max = std::max(n_max, n.E(s - nm));
      }
    }
    const bool has_m = std::isfinite(m_min);
    const double m_rate = has_m ? m_min : n_max / up;
    const double n_rate = has_m ? m_min * up : n_max;
    q = std::max(q, m_rate);
    for (auto s : block) {
      if (s < nm) {
        em(s) = m_rate;
      } else {
        en(s - nm) = n_rate;
      }
    }
  }

  PairUniformization out;
  out.q_m = q;
  out.q_n = q * up;
  Ctmc m_flat = m;
  m_flat.E = em;
  m_flat.rate_text.clear();
  Ctmc n_flat = n;
  n_flat.E = en;
  n_flat.rate_text.clear();
  out.m_prime = uniformize_ctmc(m_flat, out.q_m);
  out.n_prime = uniformize_ctmc(n_flat, out.q_n);
  out.recheck = is_bisimulation(direct_sum(out.m_prime, out.n_prime), r);
  if (!out.recheck.ok) out.warnings.push_back("relation does not survive the transformation: " + out.recheck.detail);

  if (!m.goal() || !n.goal()) {
    out.warnings.push_back("ordering not checked: both chains need a goal state");
    return out;
  }
  std::vector<double> pm, pn;
  for (double t : grid) {
    pm.push_back(timed_reach(m, m.initial(), t));
    pn.push_back(timed_reach(n, n.initial(), t));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (pm[i] > pn[i] + kOrderingSlack) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "OrderingAssumptionViolated: Pr^M = " << pm[i] << " exceeds Pr^N = " << pn[i] << " at t = " << grid[i];
      out.warnings.push_back(msg.str());
      return out;
    }
  }
  out.ordering_checked = true;
  out.ordering_holds = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = timed_reach(out.m_prime, out.m_prime.initial(), grid[i]);
    const double d = timed_reach(out.n_prime, out.n_prime.initial(), grid[i]);
    if (a > pm[i] + kOrderingSlack || pn[i] > d + kOrderingSlack) {
      out.ordering_holds = false;
      std::ostringstream msg;
      msg.precision(17);
      msg << "ordering fails at t = " << grid[i] << ": " << a << ", " << pm[i] << ", " << pn[i] << ", " << d;
      out.warnings.push_back(msg.str());
    }
  }
  return out;
}

}  // namespace epsbisim
