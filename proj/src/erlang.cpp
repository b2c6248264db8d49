#include "epsbisim/erlang.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "epsbisim/transient.hpp"

namespace epsbisim {

namespace {

void check_params(double c, double t) {
  if (!(c >= 1.0) || !std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "need c >= 1");
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::InvalidArgument, "need t >= 0");
}

// Pr(Pois(x) <= k) for k = 0 .. kmax.
std::vector<double> poisson_cdf(std::size_t kmax, double x) {
  std::vector<double> cdf(kmax + 1, 1.0);
  if (x == 0.0) return cdf;
  double acc = 0.0;
  const double lx = std::log(x);
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double kd = static_cast<double>(k);
    acc += std::exp(kd * lx - x - std::lgamma(kd + 1.0));
    cdf[k] = std::min(acc, 1.0);
  }
  return cdf;
}

}  // namespace

double erlang_diff(std::size_t n, double c, double t) {
  check_params(c, t);
  if (n == 0 || t == 0.0 || c == 1.0) return 0.0;
  const double a = static_cast<double>(n);
  return std::clamp(boost::math::gamma_q(a, t) - boost::math::gamma_q(a, c * t), 0.0, 1.0);
}

std::vector<double> erlang_diff_sequence(std::size_t nmax, double c, double t) {
  check_params(c, t);
  std::vector<double> out(nmax + 1, 0.0);
  if (t == 0.0 || c == 1.0 || nmax == 0) return out;
  const auto slow = poisson_cdf(nmax - 1, t);
  const auto fast = poisson_cdf(nmax - 1, c * t);
  for (std::size_t n = 1; n <= nmax; ++n) out[n] = std::clamp(slow[n - 1] - fast[n - 1], 0.0, 1.0);
  return out;
}

double erlang_diff_argmax(std::size_t n, double c) {
  if (n == 0 || !(c > 1.0)) throw Error(ErrorKind::NotApplicable, "maximizer needs n >= 1 and c > 1");
  return static_cast<double>(n) * std::log(c) / (c - 1.0);
}

double uniformization_bound(double eps, double delta, double q, double t) {
  if (eps < 0.0 || delta < 0.0 || q < 0.0 || t < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "bound parameters must be nonnegative");
  }
  return -std::expm1(-q * t * (std::exp(delta) * (1.0 + eps) - 1.0));
}

double ParetoRegion::eps_max(double delta) const {
  const double qt = q * t;
  return std::max(0.0, std::exp(-delta) * (qt - std::log1p(-theta)) / qt - 1.0);
}

double ParetoRegion::delta_max(double eps) const {
  const double qt = q * t;
  return std::max(0.0, std::log((qt - std::log1p(-theta)) / ((eps + 1.0) * qt)));
}

ParetoRegion pareto_region(double theta, double q, double t) {
  if (!(theta >= 0.0 && theta < 1.0)) throw Error(ErrorKind::InvalidArgument, "need theta in [0, 1)");
  if (!(q * t > 0.0)) throw Error(ErrorKind::InvalidArgument, "need q t > 0");
  return ParetoRegion{theta, q, t};
}

std::size_t erlang_N(double t, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::NotApplicable, "Erlang bound needs delta > 0");
  return static_cast<std::size_t>(std::ceil(std::expm1(delta) * t / delta));
}

double erlang_N_bound(double t, double delta) {
  if (delta == 0.0) return 0.0;
  return erlang_diff(erlang_N(t, delta), std::exp(delta), t);
}

double require_uniform_rate(const Ctmc& m) {
  auto r = uniform_rate(m);
  if (!r) throw Error(ErrorKind::NonUniformRates, "chain has differing exit rates");
  return *r;
}

namespace {

void require_goal(const Ctmc& m) {
  if (!m.goal()) throw Error(ErrorKind::NoGoalState, "chain has no goal state");
}

}  // namespace

double exact_diff_series(const Ctmc& m, double delta, double t, double tol) {
  require_goal(m);
  const double rt = require_uniform_rate(m) * t;
  if (m.initial() == *m.goal() || rt == 0.0 || delta == 0.0) return 0.0;
  const double c = std::exp(delta);
  std::size_t K = 64;
  HitStepDistribution h = hit_exact_steps(m, K);
  while (h.tail_mass >= tol) {
    if (K > (std::size_t{1} << 24)) throw Error(ErrorKind::NotApplicable, "hit distribution converges too slowly");
    K *= 2;
    h = hit_exact_steps(m, K);
  }
  const auto d = erlang_diff_sequence(K, c, rt);
  double sum = 0.0;
  for (std::size_t n = 1; n <= K; ++n) sum += h.probs[n - 1] * d[n];
  return std::clamp(sum, 0.0, 1.0);
}

double markov_bound(const Ctmc& m, double delta, double t, double tol) {
  require_goal(m);
  const double rt = require_uniform_rate(m) * t;
  const double ex = expected_hit_steps(m);
  if (!std::isfinite(ex)) throw Error(ErrorKind::NotApplicable, "goal is missed with positive probability");
  if (m.initial() == *m.goal() || rt == 0.0 || delta == 0.0) return 0.0;
  const double c = std::exp(delta);
  const double ct = c * rt;
  // Tail certificate: sum_{n>K} Diff_t(E_n)/n <= ct Pr(Pois(ct) >= K) / (K + 1).
  auto tail = [&](std::size_t K) {
    return ex * ct * boost::math::gamma_p(static_cast<double>(K), ct) / static_cast<double>(K + 1);
  };
  std::size_t K = std::max<std::size_t>(16, static_cast<std::size_t>(2.0 * ct));
  while (tail(K) >= tol) K *= 2;
  const auto d = erlang_diff_sequence(K, c, rt);
  double sum = 0.0;
  for (std::size_t n = 1; n <= K; ++n) sum += d[n] / static_cast<double>(n);
  return std::min(1.0, ex * sum + tail(K));
}

}  // namespace epsbisim
