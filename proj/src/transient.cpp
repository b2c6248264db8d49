#include "epsbisim/transient.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace epsbisim {

PoissonWeights poisson_weights(double lambda, double truncation_error) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "Poisson rate must be finite and nonnegative");
  }
  if (!(truncation_error > 0.0 && truncation_error < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "truncation error must lie in (0,1)");
  }
  PoissonWeights pw;
  if (lambda == 0.0) {
    pw.w = {1.0};
    return pw;
  }
  // Unnormalized weights relative to the mode, grown outward until geometric
  // bounds on both tails fall below the requested error.
  const std::size_t mode = static_cast<std::size_t>(std::floor(lambda));
  std::vector<double> left_part;   // mode-1, mode-2, ...
  std::vector<double> right_part;  // mode, mode+1, ...
  right_part.push_back(1.0);
  double sum = 1.0;
  std::size_t L = mode, R = mode;
  const double target = truncation_error / 2.0;
  for (;;) {
    const double wl = left_part.empty() ? right_part.front() : left_part.back();
    const double wr = right_part.back();
    double left_tail = 0.0;
    if (L > 0) {
      const double rho = static_cast<double>(L) / lambda;
      left_tail = rho < 1.0 ? wl * rho / (1.0 - rho) : std::numeric_limits<double>::infinity();
    }
    double right_tail = 0.0;
    {
      const double rho = lambda / static_cast<double>(R + 1);
      right_tail = rho < 1.0 ? wr * rho / (1.0 - rho) : std::numeric_limits<double>::infinity();
    }
    if (left_tail + right_tail <= target * sum) {
      pw.discarded_bound = (left_tail + right_tail) / sum;
      break;
    }
    const double next_left = L > 0 ? wl * static_cast<double>(L) / lambda : 0.0;
    const double next_right = wr * lambda / static_cast<double>(R + 1);
    if (L > 0 && (next_left >= next_right || right_tail <= target * sum / 2.0)) {
      left_part.push_back(next_left);
      sum += next_left;
      --L;
    } else {
      right_part.push_back(next_right);
      sum += next_right;
      ++R;
    }
  }
  pw.left = L;
  pw.w.reserve(R - L + 1);
  for (auto it = left_part.rbegin(); it != left_part.rend(); ++it) pw.w.push_back(*it / sum);
  for (double x : right_part) pw.w.push_back(x / sum);
  return pw;
}

Vector transient_distribution(const Ctmc& m, const TransientQuery& query) {
  if (query.start >= m.size()) throw Error(ErrorKind::InvalidState, "start state out of range");
  if (!(query.t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "time horizon must be nonnegative");
  const Eigen::Index n = static_cast<Eigen::Index>(m.size());
  Vector v = Vector::Zero(n);
  v(static_cast<Eigen::Index>(query.start)) = 1.0;
  if (query.t == 0.0) return v;
  const double q = query.q.value_or(max_rate(m));
  const Matrix PT = uniformize(m, q).P.transpose();
  const PoissonWeights pw = poisson_weights(q * query.t, query.truncation_error);
  Vector acc = Vector::Zero(n);
  for (std::size_t k = 0; k <= pw.right(); ++k) {
    if (k >= pw.left) acc += pw.w[k - pw.left] * v;
    if (k < pw.right()) v = PT * v;
  }
  return acc;
}

namespace {

std::size_t require_goal(const Dtmc& d) {
  if (!d.goal) throw Error(ErrorKind::NoGoalState, "chain has no goal state");
  return *d.goal;
}

}  // namespace

double timed_reach(const Ctmc& m, std::size_t s, double t, double tol) {
  const std::size_t g = require_goal(m.chain);
  if (s == g) return 1.0;
  TransientQuery q;
  q.start = s;
  q.t = t;
  q.truncation_error = tol;
  return std::clamp(transient_distribution(m, q)(static_cast<Eigen::Index>(g)), 0.0, 1.0);
}

double step_reach(const Dtmc& d, std::size_t s, std::size_t k) {
  const std::size_t g = require_goal(d);
  if (s >= d.size()) throw Error(ErrorKind::InvalidState, "state out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d.size()));
  v(static_cast<Eigen::Index>(s)) = 1.0;
  const Matrix PT = d.P.transpose();
  for (std::size_t i = 0; i < k; ++i) v = PT * v;
  return v(static_cast<Eigen::Index>(g));
}

double reach_probability(const Dtmc& d, std::size_t s) {
  const std::size_t g = require_goal(d);
  if (s == g) return 1.0;
  auto alive = can_reach(d.P, g);
  if (!alive[s]) return 0.0;
  std::vector<std::size_t> T;
  std::vector<Eigen::Index> pos(d.size(), -1);
  for (std::size_t x = 0; x < d.size(); ++x) {
    if (alive[x] && x != g) {
      pos[x] = static_cast<Eigen::Index>(T.size());
      T.push_back(x);
    }
  }
  const Eigen::Index k = static_cast<Eigen::Index>(T.size());
  Matrix A = Matrix::Identity(k, k);
  Vector b(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) A(i, j) -= d.P(T[i], T[j]);
    b(i) = d.P(T[i], g);
  }
  Vector x = A.partialPivLu().solve(b);
  return std::clamp(x(pos[s]), 0.0, 1.0);
}

HitStepDistribution hit_exact_steps(const Dtmc& d, std::size_t K) {
  const std::size_t g = require_goal(d);
  HitStepDistribution out;
  out.probs.reserve(K);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d.size()));
  v(static_cast<Eigen::Index>(d.initial)) = 1.0;
  const Matrix PT = d.P.transpose();
  double prev = v(static_cast<Eigen::Index>(g));
  double sum = 0.0;
  for (std::size_t n = 1; n <= K; ++n) {
    v = PT * v;
    const double cur = v(static_cast<Eigen::Index>(g));
    const double p = std::max(0.0, cur - prev);
    out.probs.push_back(p);
    sum += p;
    prev = cur;
  }
  out.never = 1.0 - reach_probability(d, d.initial);
  out.tail_mass = std::max(0.0, 1.0 - sum - out.never);
  if (d.initial == g) out.tail_mass = 0.0;
  return out;
}

HitStepDistribution hit_exact_steps(const Ctmc& m, std::size_t K) { return hit_exact_steps(m.chain, K); }

double expected_hit_steps(const Dtmc& d) {
  const std::size_t g = require_goal(d);
  if (d.initial == g) return 0.0;
  auto reach = reachable_from(d.P, d.initial);
  auto alive = can_reach(d.P, g);
  std::vector<std::size_t> T;
  for (std::size_t x = 0; x < d.size(); ++x) {
    if (!reach[x]) continue;
    if (!alive[x]) return std::numeric_limits<double>::infinity();
    if (x != g) T.push_back(x);
  }
  const Eigen::Index k = static_cast<Eigen::Index>(T.size());
  Matrix A = Matrix::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) A(i, j) -= d.P(T[i], T[j]);
  }
  Vector x = A.partialPivLu().solve(Vector::Ones(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    if (T[i] == d.initial) return x(i);
  }
  return 0.0;
}

double expected_hit_steps(const Ctmc& m) { return expected_hit_steps(m.chain); }

std::vector<double> diff_curve(const Ctmc& m, double c, const std::vector<double>& grid, double tol) {
  if (!uniform_rate(m)) throw Error(ErrorKind::NonUniformRates, "chain must have uniform exit rates");
  if (!(c >= 1.0)) throw Error(ErrorKind::InvalidArgument, "acceleration factor must be >= 1");
  require_goal(m.chain);
  const Ctmc fast = scale(m, c);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const double slow_p = timed_reach(m, m.initial(), t, tol / 2.0);
    const double fast_p = timed_reach(fast, fast.initial(), t, tol / 2.0);
    out.push_back(std::abs(fast_p - slow_p));
  }
  return out;
}

std::vector<double> reach_gap_curve(const Ctmc& a, const Ctmc& b, const std::vector<double>& grid,
                                    double tol) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) {
    out.push_back(std::abs(timed_reach(b, b.initial(), t, tol / 2.0) - timed_reach(a, a.initial(), t, tol / 2.0)));
  }
  return out;
}

Interval wilson_interval(std::size_t hits, std::size_t n, double confidence) {
  if (n == 0) return {0.0, 1.0};
  boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 1.0 - (1.0 - confidence) / 2.0);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

// Deterministic across standard library implementations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 gen_;
};

struct JumpTable {
  std::vector<std::vector<std::pair<double, std::size_t>>> rows;

  explicit JumpTable(const Matrix& P) : rows(static_cast<std::size_t>(P.rows())) {
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < P.cols(); ++j) {
        if (P(i, j) > 0.0) {
          acc += P(i, j);
          rows[i].emplace_back(acc, static_cast<std::size_t>(j));
        }
      }
    }
  }

  std::size_t next(std::size_t s, double u) const {
    const auto& row = rows[s];
    const double x = u * row.back().first;
    for (const auto& [c, j] : row) {
      if (x < c) return j;
    }
    return row.back().second;
  }
};

constexpr std::size_t kMaxJumps = 10'000'000;

template <class StepCost>
SimulationResult simulate(const Ctmc& m, std::size_t n, double budget, std::uint64_t seed,
                          double confidence, std::optional<std::size_t> start, StepCost cost) {
  const std::size_t g = require_goal(m.chain);
  const std::size_t s0 = start.value_or(m.initial());
  if (s0 >= m.size()) throw Error(ErrorKind::InvalidState, "start state out of range");
  JumpTable jumps(m.P());
  Sampler rng(seed);
  SimulationResult r;
  r.paths = n;
  for (std::size_t path = 0; path < n; ++path) {
    std::size_t x = s0;
    double used = 0.0;
    for (std::size_t step = 0; step < kMaxJumps; ++step) {
      if (x == g) {
        ++r.hits;
        break;
      }
      if (is_absorbing(m.P(), x)) break;
      used += cost(x, rng.exponential(m.E(static_cast<Eigen::Index>(x))));
      if (used > budget) break;
      x = jumps.next(x, rng.uniform());
    }
  }
  r.estimate = n ? static_cast<double>(r.hits) / static_cast<double>(n) : 0.0;
  r.ci = wilson_interval(r.hits, n, confidence);
  return r;
}

}  // namespace

SimulationResult simulate_paths(const Ctmc& m, std::size_t n, double horizon, std::uint64_t seed,
                                double confidence, std::optional<std::size_t> start) {
  return simulate(m, n, horizon, seed, confidence, start, [](std::size_t, double dt) { return dt; });
}

SimulationResult simulate_reward_paths(const Ctmc& m, std::size_t n, double reward_bound,
                                       std::uint64_t seed, double confidence,
                                       std::optional<std::size_t> start) {
  if (!m.rewards) throw Error(ErrorKind::MissingRewards, "chain has no rewards");
  const Vector rho = *m.rewards;
  return simulate(m, n, reward_bound, seed, confidence, start,
                  [&rho](std::size_t x, double dt) { return rho(static_cast<Eigen::Index>(x)) * dt; });
}

}  // namespace epsbisim
