#include "epsbisim/bisim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "epsbisim/maxflow.hpp"

namespace epsbisim {

PairRelation::PairRelation(std::size_t n, double eps_, double delta_)
    : eps(eps_), delta(delta_), n_(n), bits_(n * n, 0) {
  for (std::size_t i = 0; i < n; ++i) bits_[i * n + i] = 1;
}

void PairRelation::relate(std::size_t i, std::size_t j) {
  bits_[i * n_ + j] = 1;
  bits_[j * n_ + i] = 1;
}

void PairRelation::unrelate(std::size_t i, std::size_t j) {
  if (i == j) return;
  bits_[i * n_ + j] = 0;
  bits_[j * n_ + i] = 0;
}

std::vector<std::pair<std::size_t, std::size_t>> PairRelation::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (related(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<std::size_t> PairRelation::related_to(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n_; ++j) {
    if (related(i, j)) out.push_back(j);
  }
  return out;
}

bool PairRelation::is_transitive() const { return transitive_closure() == *this; }

PairRelation PairRelation::transitive_closure() const {
  PairRelation c = *this;
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (!c.related(i, k)) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        if (c.related(k, j)) c.bits_[i * n_ + j] = 1;
      }
    }
  }
  return c;
}

bool PairRelation::subset_of(const PairRelation& other) const {
  if (n_ != other.n_) return false;
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (bits_[k] && !other.bits_[k]) return false;
  }
  return true;
}

nlohmann::ordered_json relation_to_json(const PairRelation& r, const std::vector<std::string>& ids) {
  nlohmann::ordered_json doc;
  doc["pairs"] = nlohmann::ordered_json::array();
  for (const auto& [i, j] : r.pairs()) doc["pairs"].push_back({ids[i], ids[j]});
  doc["eps"] = r.eps;
  doc["delta"] = r.delta;
  return doc;
}

PairRelation relation_from_json(const nlohmann::json& doc, const std::vector<std::string>& ids) {
  auto index = [&](const nlohmann::json& v) -> std::size_t {
    if (!v.is_string()) throw Error(ErrorKind::Parse, "relation pairs must hold state ids");
    auto it = std::find(ids.begin(), ids.end(), v.get<std::string>());
    if (it == ids.end()) throw Error(ErrorKind::InvalidState, "unknown state '" + v.get<std::string>() + "'");
    return static_cast<std::size_t>(it - ids.begin());
  };
  if (!doc.is_object() || !doc.contains("pairs")) throw Error(ErrorKind::Parse, "relation needs 'pairs'");
  PairRelation r(ids.size(), doc.value("eps", 0.0), doc.value("delta", 0.0));
  for (const auto& p : doc.at("pairs")) {
    if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::Parse, "each pair must have two ids");
    r.relate(index(p[0]), index(p[1]));
  }
  return r;
}

PairRelation compose(const PairRelation& r1, const PairRelation& r2) {
  const std::size_t n = r1.size();
  if (r2.size() != n) throw Error(ErrorKind::InvalidArgument, "relations over different state sets");
  PairRelation out(n, r1.eps + r2.eps, r1.delta + r2.delta);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!r1.related(a, b)) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (r2.related(b, c)) out.relate(a, c);
      }
    }
  }
  return out;
}

std::vector<std::size_t> Partition::block_index(std::size_t n) const {
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (auto s : blocks[b]) idx[s] = b;
  }
  return idx;
}

namespace {

bool same_reward(const Ctmc& m, std::size_t s, std::size_t t) {
  return !m.rewards || (*m.rewards)(static_cast<Eigen::Index>(s)) == (*m.rewards)(static_cast<Eigen::Index>(t));
}

double log_rate_gap(const Ctmc& m, std::size_t s, std::size_t t) {
  return std::abs(std::log(m.E(static_cast<Eigen::Index>(s))) - std::log(m.E(static_cast<Eigen::Index>(t))));
}

void sort_blocks(Partition& p) {
  for (auto& b : p.blocks) std::sort(b.begin(), b.end());
  std::sort(p.blocks.begin(), p.blocks.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

}  // namespace

Partition strong_bisim(const Ctmc& m) {
  const std::size_t n = m.size();
  constexpr double kSignatureTolerance = 1e-9;
  Partition p;
  for (std::size_t s = 0; s < n; ++s) {
    bool placed = false;
    for (auto& b : p.blocks) {
      std::size_t r = b.front();
      if (m.chain.labels[r] == m.chain.labels[s] && log_rate_gap(m, r, s) <= kLogRateTolerance &&
          same_reward(m, r, s)) {
        b.push_back(s);
        placed = true;
        break;
      }
    }
    if (!placed) p.blocks.push_back({s});
  }
  for (bool changed = true; changed;) {
    changed = false;
    const auto idx = p.block_index(n);
    const std::size_t k = p.blocks.size();
    auto signature = [&](std::size_t s) {
      std::vector<double> sig(k, 0.0);
      for (std::size_t j = 0; j < n; ++j) sig[idx[j]] += m.P()(s, j);
      return sig;
    };
    Partition next;
    for (const auto& b : p.blocks) {
      std::vector<std::vector<std::size_t>> groups;
      std::vector<std::vector<double>> reps;
      for (auto s : b) {
        auto sig = signature(s);
        bool placed = false;
        for (std::size_t g = 0; g < groups.size() && !placed; ++g) {
          double gap = 0.0;
          for (std::size_t c = 0; c < k; ++c) gap = std::max(gap, std::abs(sig[c] - reps[g][c]));
          if (gap <= kSignatureTolerance) {
            groups[g].push_back(s);
            placed = true;
          }
        }
        if (!placed) {
          groups.push_back({s});
          reps.push_back(std::move(sig));
        }
      }
      if (groups.size() > 1) changed = true;
      for (auto& g : groups) next.blocks.push_back(std::move(g));
    }
    p = std::move(next);
  }
  sort_blocks(p);
  return p;
}

PairRelation relation_of(const Partition& p, std::size_t n, double eps, double delta) {
  PairRelation r(n, eps, delta);
  for (const auto& b : p.blocks) {
    for (auto i : b) {
      for (auto j : b) r.relate(i, j);
    }
  }
  return r;
}

Partition partition_of(const PairRelation& r) {
  if (!r.is_transitive()) throw Error(ErrorKind::NotTransitive, "relation is not transitive");
  Partition p;
  std::vector<bool> done(r.size(), false);
  for (std::size_t s = 0; s < r.size(); ++s) {
    if (done[s]) continue;
    p.blocks.push_back(r.related_to(s));
    for (auto x : p.blocks.back()) done[x] = true;
  }
  return p;
}

namespace {

std::vector<std::size_t> successors(const Matrix& P, std::size_t s) {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    if (P(static_cast<Eigen::Index>(s), j) > 0.0) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

struct TransportProblem {
  std::vector<std::size_t> succ_s, succ_t;
  FlowNetwork net;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> related_edges;  // (i, j, edge id)
  double value = 0.0;

  TransportProblem(const Dtmc& d, const PairRelation& r, std::size_t s, std::size_t t)
      : succ_s(successors(d.P, s)), succ_t(successors(d.P, t)), net(succ_s.size() + succ_t.size() + 2) {
    const std::size_t a = succ_s.size();
    const std::size_t source = a + succ_t.size();
    const std::size_t sink = source + 1;
    const double unbounded = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a; ++i) net.add_edge(source, i, d.P(s, succ_s[i]));
    for (std::size_t j = 0; j < succ_t.size(); ++j) net.add_edge(a + j, sink, d.P(t, succ_t[j]));
    for (std::size_t i = 0; i < a; ++i) {
      for (std::size_t j = 0; j < succ_t.size(); ++j) {
        if (r.related(succ_s[i], succ_t[j])) related_edges.emplace_back(i, j, net.add_edge(i, a + j, unbounded));
      }
    }
    value = net.max_flow(source, sink);
  }
};

}  // namespace

double related_flow(const Dtmc& d, const PairRelation& r, std::size_t s, std::size_t t) {
  return TransportProblem(d, r, s, t).value;
}

bool check_pair_flow(const Dtmc& d, const PairRelation& r, std::size_t s, std::size_t t, double eps) {
  return related_flow(d, r, s, t) >= 1.0 - eps - kFlowTolerance;
}

bool locally_compatible(const Ctmc& m, std::size_t s, std::size_t t, double delta) {
  return m.chain.labels[s] == m.chain.labels[t] && log_rate_gap(m, s, t) <= delta + kLogRateTolerance &&
         same_reward(m, s, t);
}

PairRelation initial_relation(const Ctmc& m, double eps, double delta) {
  const std::size_t n = m.size();
  PairRelation r(n, eps, delta);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (locally_compatible(m, i, j, delta)) r.relate(i, j);
    }
  }
  return r;
}

PairRelation epsilon_delta_bisim(const Ctmc& m, double eps, double delta) {
  PairRelation r = initial_relation(m, eps, delta);
  for (;;) {
    std::vector<std::pair<std::size_t, std::size_t>> failing;
    for (const auto& [i, j] : r.pairs()) {
      if (!check_pair_flow(m.chain, r, i, j, eps) || !check_pair_flow(m.chain, r, j, i, eps)) {
        failing.emplace_back(i, j);
      }
    }
    if (failing.empty()) break;
    for (const auto& [i, j] : failing) r.unrelate(i, j);
  }
  return r;
}

BisimCheck is_bisimulation(const Ctmc& m, const PairRelation& r) {
  const std::size_t n = m.size();
  if (r.size() != n) throw Error(ErrorKind::InvalidArgument, "relation size does not match the chain");
  BisimCheck out;
  auto fail = [&](std::size_t i, std::size_t j, const char* cond, std::string detail) {
    out.ok = false;
    out.pair = std::make_pair(i, j);
    out.condition = cond;
    out.detail = std::move(detail);
  };
  for (std::size_t i = 0; i < n && out.ok; ++i) {
    for (std::size_t j = 0; j < n && out.ok; ++j) {
      if (i == j || !r.related(i, j)) continue;
      if (m.chain.labels[i] != m.chain.labels[j]) {
        fail(i, j, "label", "labels differ");
      } else if (!same_reward(m, i, j)) {
        fail(i, j, "reward", "rewards differ");
      } else if (log_rate_gap(m, i, j) > r.delta + kLogRateTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "|ln E(s) - ln E(s')| = " << log_rate_gap(m, i, j);
        fail(i, j, "delta", msg.str());
      } else {
        const double flow = related_flow(m.chain, r, i, j);
        if (flow < 1.0 - r.eps - kFlowTolerance) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "related flow " << flow << " < 1 - eps";
          fail(i, j, "epsilon", msg.str());
        }
      }
    }
  }
  return out;
}

double Coupling::weight(std::size_t s_next, std::size_t t_next) const {
  auto i = std::find(succ_source.begin(), succ_source.end(), s_next);
  auto j = std::find(succ_target.begin(), succ_target.end(), t_next);
  if (i == succ_source.end() || j == succ_target.end()) return 0.0;
  return weights(i - succ_source.begin(), j - succ_target.begin());
}

Coupling extract_coupling(const Dtmc& d, const PairRelation& r, std::size_t s, std::size_t t, double eps) {
  TransportProblem tp(d, r, s, t);
  if (tp.value < 1.0 - eps - kFlowTolerance) {
    throw Error(ErrorKind::PairNotRelated, "pair (" + d.ids[s] + ", " + d.ids[t] + ") fails the flow check");
  }
  const std::size_t a = tp.succ_s.size();
  const std::size_t b = tp.succ_t.size();
  Matrix F = Matrix::Zero(a, b);
  for (const auto& [i, j, e] : tp.related_edges) F(i, j) = std::max(0.0, tp.net.flow(e));
  std::vector<double> supply(a), demand(b);
  for (std::size_t i = 0; i < a; ++i) supply[i] = std::max(0.0, d.P(s, tp.succ_s[i]) - F.row(i).sum());
  for (std::size_t j = 0; j < b; ++j) demand[j] = std::max(0.0, d.P(t, tp.succ_t[j]) - F.col(j).sum());
  // Northwest-corner completion over index order.
  std::size_t i = 0, j = 0;
  while (i < a && j < b) {
    const double x = std::min(supply[i], demand[j]);
    F(i, j) += x;
    supply[i] -= x;
    demand[j] -= x;
    if (supply[i] <= 1e-15) {
      ++i;
    } else {
      ++j;
    }
  }
  for (; i < a; ++i) F(i, b - 1) += supply[i];

  Coupling c;
  c.source = s;
  c.target = t;
  c.succ_source = tp.succ_s;
  c.succ_target = tp.succ_t;
  c.weights = Matrix::Zero(a, b);
  for (std::size_t k = 0; k < a; ++k) {
    const double row = F.row(k).sum();
    if (row > 0.0) c.weights.row(k) = F.row(k) / row;
  }
  return c;
}

CouplingReport inspect_coupling(const Dtmc& d, const PairRelation& r, const Coupling& c) {
  CouplingReport rep;
  const std::size_t a = c.succ_source.size();
  const std::size_t b = c.succ_target.size();
  for (std::size_t i = 0; i < a; ++i) {
    rep.row_error = std::max(rep.row_error, std::abs(c.weights.row(i).sum() - 1.0));
    for (std::size_t j = 0; j < b; ++j) {
      if (c.weights(i, j) < 0.0 || c.weights(i, j) > 1.0 + 1e-12) rep.min_entry_ok = false;
      if (r.related(c.succ_source[i], c.succ_target[j])) {
        rep.related_mass += d.P(c.source, c.succ_source[i]) * c.weights(i, j);
      }
    }
  }
  for (std::size_t j = 0; j < b; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < a; ++i) m += d.P(c.source, c.succ_source[i]) * c.weights(i, j);
    rep.marginal_error = std::max(rep.marginal_error, std::abs(m - d.P(c.target, c.succ_target[j])));
  }
  return rep;
}

double quasi_lumpability_tau(const Ctmc& m, const Partition& p) {
  const std::size_t n = m.size();
  const auto idx = p.block_index(n);
  Matrix rate_into = Matrix::Zero(n, p.blocks.size());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < n; ++j) rate_into(s, idx[j]) += m.P()(s, j);
    rate_into.row(s) *= m.E(s);
  }
  double tau = 0.0;
  for (const auto& b : p.blocks) {
    for (auto s : b) {
      for (auto u : b) tau = std::max(tau, (rate_into.row(s) - rate_into.row(u)).cwiseAbs().maxCoeff());
    }
  }
  return tau;
}

bool check_quasi_lumpability(const Ctmc& m, const Partition& p, double tau) {
  return quasi_lumpability_tau(m, p) <= tau + 1e-12 * std::max(1.0, max_rate(m));
}

std::size_t lumpability_counterexample_size(double eps, double delta, double tau) {
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0) || !(tau > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "need eps in (0,1), delta > 0 and tau > 0");
  }
  const double bound = std::max(eps * (tau + 1.0) / (tau * (1.0 - eps)), std::exp(delta) / tau - 1.0);
  return static_cast<std::size_t>(std::floor(bound)) + 1;
}

Ctmc lumpability_counterexample(double eps, double delta, double tau) {
  const std::size_t n = lumpability_counterexample_size(eps, delta, tau);
  const double denom = 1.0 + static_cast<double>(n + 1) * tau;
  CtmcBuilder b;
  b.state("s", {"a"}, 1.0);
  b.state("s'", {"a"}, denom);
  b.state("g", {"a_g"}, 1.0);
  b.edge("s", "g", 1.0);
  b.edge("s'", "g", (1.0 + tau) / denom);
  b.edge("g", "g", 1.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const std::string id = "s" + std::to_string(i);
    b.state(id, {"a_" + id}, 1.0);
    b.edge("s'", id, tau / denom);
    b.edge(id, id, 1.0);
  }
  b.initial("s").goal("g");
  return b.build();
}

}  // namespace epsbisim
