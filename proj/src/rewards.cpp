#include "epsbisim/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "epsbisim/erlang.hpp"
#include "epsbisim/transient.hpp"

namespace epsbisim {

namespace {

double reward(const Ctmc& m, std::size_t s) { return (*m.rewards)(static_cast<Eigen::Index>(s)); }

// Zero-reward absorbing states other than the goal get the sentinel reward.
Ctmc with_sentinel_rewards(const Ctmc& m) {
  Ctmc out = m;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (s != *m.goal() && reward(m, s) == 0.0 && is_absorbing(m.P(), s)) {
      (*out.rewards)(static_cast<Eigen::Index>(s)) = kAbsorbingSentinelReward;
    }
  }
  return out;
}

void reject_zero_reward_cycles(const Ctmc& m) {
  const std::size_t n = m.size();
  std::vector<int> state(n, 0);
  std::function<void(std::size_t)> visit = [&](std::size_t s) {
    state[s] = 1;
    for (std::size_t t = 0; t < n; ++t) {
      if (t == s || reward(m, t) != 0.0 || m.P()(s, t) <= 0.0) continue;
      if (state[t] == 1) {
        throw Error(ErrorKind::ZeroRewardCycle,
                    "zero-reward states " + m.chain.ids[s] + " and " + m.chain.ids[t] + " lie on a cycle");
      }
      if (state[t] == 0) visit(t);
    }
    state[s] = 2;
  };
  for (std::size_t s = 0; s < n; ++s) {
    if (reward(m, s) == 0.0 && state[s] == 0) visit(s);
  }
}

}  // namespace

const Ctmc& require_rewarded(const Ctmc& m) {
  if (!m.rewards) throw Error(ErrorKind::MissingRewards, "chain carries no rewards");
  if (!m.goal()) throw Error(ErrorKind::NoGoalState, "chain has no goal state");
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (!(reward(m, s) >= 0.0) || !std::isfinite(reward(m, s))) {
      throw Error(ErrorKind::InvalidArgument, "reward of " + m.chain.ids[s] + " must be nonnegative");
    }
  }
  if (reward(m, *m.goal()) == 0.0) {
    throw Error(ErrorKind::ZeroReward, "goal state " + m.chain.ids[*m.goal()] + " has reward 0");
  }
  return m;
}

Ctmc remove_zero_reward_self_loop(const Ctmc& m, std::size_t s) {
  if (!m.rewards) throw Error(ErrorKind::MissingRewards, "chain carries no rewards");
  if (s >= m.size()) throw Error(ErrorKind::InvalidState, "state index out of range");
  if (reward(m, s) != 0.0) throw Error(ErrorKind::NonzeroReward, "state " + m.chain.ids[s] + " has positive reward");
  const double loop = m.P()(s, s);
  if (loop == 0.0) return m;
  if (loop >= 1.0 - kRowSumTolerance) throw Error(ErrorKind::AbsorbingState, "state " + m.chain.ids[s] + " is absorbing");
  Ctmc out = m;
  out.chain.P(s, s) = 0.0;
  out.chain.P.row(s) /= (1.0 - loop);
  return out;
}

Elimination eliminate_zero_reward_states(const Ctmc& m_in, const std::optional<std::vector<std::size_t>>& order) {
  require_rewarded(m_in);
  Ctmc m = with_sentinel_rewards(m_in);
  reject_zero_reward_cycles(m);
  const std::size_t n = m.size();

  std::vector<std::size_t> zero;
  if (order) {
    zero = *order;
  } else {
    for (std::size_t s = 0; s < n; ++s) {
      if (reward(m, s) == 0.0) zero.push_back(s);
    }
  }
  for (auto z : zero) {
    if (z >= n || reward(m, z) != 0.0) throw Error(ErrorKind::NonzeroReward, "elimination order lists a rewarded state");
  }
  const auto zero_count = static_cast<std::size_t>((m.rewards->array() == 0.0).count());
  std::vector<std::size_t> sorted = zero;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.size() != zero_count) {
    throw Error(ErrorKind::InvalidArgument, "elimination order must list every zero-reward state once");
  }

  // Rows of eliminated states are kept up to date so that they end up holding
  // the distribution of the first surviving state reached.
  Matrix P = m.P();
  for (auto z : zero) {
    const double loop = P(z, z);
    if (loop >= 1.0 - kRowSumTolerance) throw Error(ErrorKind::AbsorbingState, "state " + m.chain.ids[z] + " is absorbing");
    if (loop > 0.0) {
      P(z, z) = 0.0;
      P.row(z) /= (1.0 - loop);
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (u == z) continue;
      const double w = P(u, z);
      if (w == 0.0) continue;
      P(u, z) = 0.0;
      P.row(u) += w * P.row(z);
    }
  }

  Elimination out;
  std::vector<std::ptrdiff_t> index(n, -1);
  for (std::size_t s = 0; s < n; ++s) {
    if (reward(m, s) > 0.0) {
      index[s] = static_cast<std::ptrdiff_t>(out.kept.size());
      out.kept.push_back(s);
    }
  }
  const std::size_t k = out.kept.size();
  Ctmc& c = out.chain;
  c.chain.ids.resize(k);
  c.chain.labels.resize(k);
  c.chain.P = Matrix::Zero(k, k);
  c.E.resize(k);
  c.rewards = Vector(k);
  if (!m.rate_text.empty()) c.rate_text.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t s = out.kept[i];
    c.chain.ids[i] = m.chain.ids[s];
    c.chain.labels[i] = m.chain.labels[s];
    c.E(i) = m.E(s);
    (*c.rewards)(i) = reward(m, s);
    if (!m.rate_text.empty()) c.rate_text[i] = m.rate_text[s];
    for (std::size_t j = 0; j < k; ++j) c.chain.P(i, j) = P(s, out.kept[j]);
  }
  out.redirect = Matrix::Zero(n, k);
  for (std::size_t s = 0; s < n; ++s) {
    if (index[s] >= 0) {
      out.redirect(s, index[s]) = 1.0;
    } else {
      for (std::size_t j = 0; j < k; ++j) out.redirect(s, j) = P(s, out.kept[j]);
    }
  }
  c.chain.goal = static_cast<std::size_t>(index[*m.goal()]);
  if (m.fail() && index[*m.fail()] >= 0) c.chain.fail = static_cast<std::size_t>(index[*m.fail()]);
  if (index[m.initial()] >= 0) {
    c.chain.initial = static_cast<std::size_t>(index[m.initial()]);
  } else {
    Eigen::Index best = 0;
    out.redirect.row(m.initial()).maxCoeff(&best);
    c.chain.initial = static_cast<std::size_t>(best);
  }
  return out;
}

Ctmc hat_transform(const Ctmc& m) {
  if (!m.rewards) throw Error(ErrorKind::MissingRewards, "chain carries no rewards");
  Ctmc out = m;
  for (std::size_t s = 0; s < m.size(); ++s) {
    const double r = reward(m, s);
    if (!(r > 0.0)) throw Error(ErrorKind::ZeroReward, "state " + m.chain.ids[s] + " has reward 0");
    out.E(static_cast<Eigen::Index>(s)) = m.E(static_cast<Eigen::Index>(s)) / r;
    (*out.rewards)(static_cast<Eigen::Index>(s)) = 1.0 / r;
  }
  out.rate_text.clear();
  return out;
}

namespace {

double reach_after_elimination(const Elimination& e, std::size_t s, double bound, double tol) {
  if (s >= static_cast<std::size_t>(e.redirect.rows())) throw Error(ErrorKind::InvalidState, "state index out of range");
  if (!(bound >= 0.0)) throw Error(ErrorKind::InvalidArgument, "reward bound must be nonnegative");
  const Ctmc hat = hat_transform(e.chain);
  double p = 0.0;
  for (Eigen::Index u = 0; u < e.redirect.cols(); ++u) {
    const double w = e.redirect(static_cast<Eigen::Index>(s), u);
    if (w > 0.0) p += w * timed_reach(hat, static_cast<std::size_t>(u), bound, tol);
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double reward_reach(const Ctmc& m, std::size_t s, double bound, double tol) {
  return reach_after_elimination(eliminate_zero_reward_states(m), s, bound, tol);
}

double reward_reach(const Ctmc& m, std::size_t s, double bound, double tol, const std::vector<std::size_t>& order) {
  return reach_after_elimination(eliminate_zero_reward_states(m, order), s, bound, tol);
}

double reward_bound(double eps, double delta, double q_hat, double bound) {
  return uniformization_bound(eps, delta, q_hat, bound);
}

}  // namespace epsbisim
