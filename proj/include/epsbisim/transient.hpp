#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "epsbisim/model.hpp"

namespace epsbisim {

inline constexpr double kDefaultTruncation = 1e-10;

// Poisson(lambda) probabilities for k = left .. left + w.size() - 1. The
// probability mass outside that window is below the requested error.
struct PoissonWeights {
  std::size_t left = 0;
  std::vector<double> w;
  double discarded_bound = 0.0;

  std::size_t right() const { return left + w.size() - 1; }
};

PoissonWeights poisson_weights(double lambda, double truncation_error);

struct TransientQuery {
  std::size_t start = 0;
  double t = 0.0;
  double truncation_error = kDefaultTruncation;
  // Uniformization rate; max exit rate when unset.
  std::optional<double> q;
};

Vector transient_distribution(const Ctmc& m, const TransientQuery& query);

double timed_reach(const Ctmc& m, std::size_t s, double t, double tol = kDefaultTruncation);
double step_reach(const Dtmc& d, std::size_t s, std::size_t k);

struct HitStepDistribution {
  // probs[n - 1] = p_n
  std::vector<double> probs;
  double tail_mass = 0.0;
  double never = 0.0;  // probability of never reaching the goal
};

HitStepDistribution hit_exact_steps(const Dtmc& d, std::size_t K);
HitStepDistribution hit_exact_steps(const Ctmc& m, std::size_t K);

// Probability of eventually reaching the goal from s.
double reach_probability(const Dtmc& d, std::size_t s);

// Expected number of jumps until the goal is hit; infinity when a state that
// cannot reach the goal is reachable from the initial state.
double expected_hit_steps(const Ctmc& m);
double expected_hit_steps(const Dtmc& d);

// |Pr^{c M}(<>^{<=t} g) - Pr^M(<>^{<=t} g)| from the initial state; M must
// have uniform rates and c >= 1.
std::vector<double> diff_curve(const Ctmc& m, double c, const std::vector<double>& grid,
                               double tol = 1e-9);
// |Pr^B - Pr^A| from the respective initial states.
std::vector<double> reach_gap_curve(const Ctmc& a, const Ctmc& b, const std::vector<double>& grid,
                                    double tol = 1e-9);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

Interval wilson_interval(std::size_t hits, std::size_t n, double confidence);

struct SimulationResult {
  std::size_t paths = 0;
  std::size_t hits = 0;
  double estimate = 0.0;
  Interval ci;
};

SimulationResult simulate_paths(const Ctmc& m, std::size_t n, double horizon, std::uint64_t seed,
                                double confidence = 0.95,
                                std::optional<std::size_t> start = std::nullopt);

// Estimates the probability of reaching the goal while the reward accumulated
// before entering it stays at most `reward_bound`.
SimulationResult simulate_reward_paths(const Ctmc& m, std::size_t n, double reward_bound,
                                       std::uint64_t seed, double confidence = 0.95,
                                       std::optional<std::size_t> start = std::nullopt);

}  // namespace epsbisim
