#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "epsbisim/curve.hpp"
#include "epsbisim/model.hpp"
#include "epsbisim/transient.hpp"

namespace epsbisim::testing {

using Rng = std::mt19937_64;

Ctmc fixture(const std::string& name);
std::string fixture_path(const std::string& name);

// s0 -> s1 -> ... -> g, all rates `rate`.
Ctmc erlang(std::size_t n, double rate = 1.0);
// s loops with probability p, otherwise moves to g.
Ctmc loop_chain(double p, double rate = 1.0);
// Labels: "s<i>" per state, "g" for the goal, "f" for the fail state.
Ctmc from_matrix(const Matrix& P, const Vector& E, std::size_t initial, std::optional<std::size_t> goal,
                 std::optional<std::size_t> fail = std::nullopt);

// Goal-normalized chain with n states, uniform rate, every transient state
// reaching the goal. With `fail`, the last state is an absorbing fail state.
Ctmc random_goal_chain(Rng& rng, std::size_t n, bool fail, double rate = 1.0);
// Unlabeled-goal chain for relation tests: labels from {a, b}, rates from
// {1, e^0.1, e^0.2}, probabilities on a quarter grid.
Ctmc random_labeled_chain(Rng& rng, std::size_t n);
// Copy with rates scaled by factors in [1, e^delta] and at most eps of each
// row's mass moved to another successor; the copy is (eps, delta)-bisimilar.
Ctmc perturbed_copy(const Ctmc& m, Rng& rng, double eps, double delta);
// Rewards in {0, 0.5, 1, 2}, positive goal reward, zero-reward states only
// move forward so there are no zero-reward cycles.
Ctmc random_rewarded_chain(Rng& rng, std::size_t n);

// The relation fixture with its transition family instantiated at `eps`.
Ctmc relation_chain(double eps, double delta);
// Three absorbing states: goal, fail and a second trap.
Ctmc three_absorbing();

std::vector<double> grid(double tmax, std::size_t points);

TransientQuery query(std::size_t start, double t, double truncation_error = kDefaultTruncation);

}  // namespace epsbisim::testing
