#pragma once

#include <cstddef>
#include <vector>

#include "epsbisim/model.hpp"

namespace epsbisim {

// |Pr^{E_n}(<>^{<=t} g) - Pr^{c E_n}(<>^{<=t} g)| for the length-n Erlang
// chain with unit rates.
double erlang_diff(std::size_t n, double c, double t);
// Values for n = 0 .. nmax.
std::vector<double> erlang_diff_sequence(std::size_t nmax, double c, double t);
// Maximizer in t of erlang_diff(n, c, .).
double erlang_diff_argmax(std::size_t n, double c);

// 1 - exp(-q t (e^delta (1 + eps) - 1))
double uniformization_bound(double eps, double delta, double q, double t);

// (eps, delta) pairs keeping uniformization_bound(eps, delta, q, t) <= theta.
struct ParetoRegion {
  double theta = 0.0;
  double q = 1.0;
  double t = 1.0;

  double eps_max(double delta) const;
  double delta_max(double eps) const;
};
ParetoRegion pareto_region(double theta, double q, double t);

// Length of the Erlang chain whose difference dominates every uniform
// unit-rate chain at time t.
std::size_t erlang_N(double t, double delta);
double erlang_N_bound(double t, double delta);

// sum_n p_n Diff_t(E_n) for a chain with uniform rates; t is rescaled by the
// common rate. The result is within tol of the full series.
double exact_diff_series(const Ctmc& m, double delta, double t, double tol = 1e-9);
// E(X) * sum_n Diff_t(E_n) / n, clamped at 1; NotApplicable when the goal is
// missed with positive probability.
double markov_bound(const Ctmc& m, double delta, double t, double tol = 1e-9);

// Common exit rate or NonUniformRates.
double require_uniform_rate(const Ctmc& m);

}  // namespace epsbisim
