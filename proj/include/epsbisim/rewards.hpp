#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "epsbisim/model.hpp"

namespace epsbisim {

// Reward given to absorbing non-goal states with zero reward before
// elimination; such states never reach the goal, so the value is irrelevant.
inline constexpr double kAbsorbingSentinelReward = 1.0;

// Checks that rewards are present, nonnegative and positive in the goal.
const Ctmc& require_rewarded(const Ctmc& m);

Ctmc remove_zero_reward_self_loop(const Ctmc& m, std::size_t s);

struct Elimination {
  Ctmc chain;                      // positive-reward states only
  std::vector<std::size_t> kept;   // new index -> original index
  // redirect(s, u): probability that original state s first reaches a
  // surviving state at new index u, passing only through eliminated states.
  // Rows of surviving states are unit vectors.
  Matrix redirect;
};

// Eliminates zero-reward states one at a time, in ascending index order unless
// `order` is given.
Elimination eliminate_zero_reward_states(const Ctmc& m,
                                         const std::optional<std::vector<std::size_t>>& order = std::nullopt);

// Exit rates E / rho and rewards 1 / rho.
Ctmc hat_transform(const Ctmc& m);

double reward_reach(const Ctmc& m, std::size_t s, double bound, double tol = 1e-9);
// Same, with a caller-chosen elimination order.
double reward_reach(const Ctmc& m, std::size_t s, double bound, double tol,
                    const std::vector<std::size_t>& order);

double reward_bound(double eps, double delta, double q_hat, double bound);

}  // namespace epsbisim
