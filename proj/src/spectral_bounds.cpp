#include <algorithm>
#include <cmath>
#include <functional>

#include "epsbisim/bisim.hpp"
#include "epsbisim/erlang.hpp"
#include "epsbisim/spectral.hpp"
#include "epsbisim/transient.hpp"

namespace epsbisim {

namespace {

std::size_t require_goal(const Ctmc& m) {
  if (!m.goal()) throw Error(ErrorKind::NoGoalState, "chain has no goal state");
  return *m.goal();
}

constexpr std::size_t kMaxTerms = std::size_t{1} << 22;

}  // namespace

std::vector<double> diag_bound(const SpectralData& sd, double rate, double delta, const std::vector<double>& grid,
                               double tol) {
  if (sd.kind != DecompositionKind::Diagonalizable) throw Error(ErrorKind::WrongKind, "decomposition is not diagonal");
  std::vector<double> out(grid.size(), 0.0);
  if (sd.aP == sd.size() || delta == 0.0 || sd.initial == sd.goal) return out;
  const double lam = std::abs(sd.lambda);
  if (lam >= 1.0) throw Error(ErrorKind::SpectralGapZero, "second eigenvalue has modulus 1");
  const double factor = diag_constants(sd).factor;
  if (factor == 0.0) return out;
  std::size_t K = 1;
  if (lam > 0.0) {
    while (factor * std::pow(lam, static_cast<double>(K)) / (1.0 - lam) >= tol) {
      if (++K > kMaxTerms) throw Error(ErrorKind::SpectralGapZero, "geometric tail does not converge");
    }
  }
  const double c = std::exp(delta);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto d = erlang_diff_sequence(K, c, rate * grid[i]);
    double sum = 0.0, w = 1.0;
    for (std::size_t k = 1; k <= K; ++k) {
      sum += w * d[k];
      w *= lam;
    }
    out[i] = factor * sum;
  }
  return out;
}

std::vector<double> diag_bound(const Ctmc& m, double delta, const std::vector<double>& grid, double tol) {
  const std::size_t g = require_goal(m);
  const double rate = require_uniform_rate(m);
  if (m.initial() == g) return std::vector<double>(grid.size(), 0.0);
  return diag_bound(decompose(m.chain), rate, delta, grid, tol);
}

std::vector<double> jordan_bound(const Ctmc& m, const SpectralData& sd, double delta, const std::vector<double>& grid,
                                 double tol) {
  const std::size_t g = require_goal(m);
  const double rate = require_uniform_rate(m);
  std::vector<double> out(grid.size(), 0.0);
  if (m.initial() == g || sd.aP == sd.size()) return out;
  const double lam = std::abs(sd.lambda);
  if (sd.is_zero(sd.lambda)) throw Error(ErrorKind::AcyclicChain, "all transient eigenvalues are 0");
  if (lam >= 1.0) throw Error(ErrorKind::SpectralGapZero, "second eigenvalue has modulus 1");
  if (delta == 0.0) return out;
  const JordanConstants jc = jordan_constants(sd);
  const double rm1 = static_cast<double>(jc.r - 1);
  // A nilpotent block of size s still feeds p_k for k <= s, and C leaves it
  // out, so those steps are taken exactly.
  std::size_t first = jc.R;
  for (const auto& b : sd.blocks) {
    if (sd.is_zero(b.eigenvalue)) first = std::max(first, b.size + 1);
  }
  auto term = [&](std::size_t k) {
    const double kd = static_cast<double>(k);
    return std::exp((kd - static_cast<double>(jc.r)) * std::log(lam) + rm1 * std::log(kd));
  };
  // Tail beyond K: the ratio term(k+1)/term(k) = lam (1 + 1/k)^(r-1) decreases
  // in k, so once it is below 1 the tail is dominated by a geometric series.
  std::size_t K = first;
  for (;;) {
    const double ratio = lam * std::pow(1.0 + 1.0 / static_cast<double>(K + 1), rm1);
    if (ratio < 1.0 && jc.C * term(K + 1) / (1.0 - ratio) < tol) break;
    if (++K > kMaxTerms) throw Error(ErrorKind::SpectralGapZero, "tail envelope does not converge");
  }
  const HitStepDistribution h = hit_exact_steps(m, first - 1);
  const double c = std::exp(delta);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto d = erlang_diff_sequence(K, c, rate * grid[i]);
    double sum = 0.0;
    for (std::size_t k = 1; k < first; ++k) sum += h.probs[k - 1] * d[k];
    double tail = 0.0;
    for (std::size_t k = first; k <= K; ++k) tail += term(k) * d[k];
    out[i] = sum + jc.C * tail;
  }
  return out;
}

std::vector<double> jordan_bound(const Ctmc& m, double delta, const std::vector<double>& grid, double tol) {
  const std::size_t g = require_goal(m);
  require_uniform_rate(m);
  if (m.initial() == g) return std::vector<double>(grid.size(), 0.0);
  return jordan_bound(m, decompose(m.chain), delta, grid, tol);
}

namespace {

// Transition graph without the self-loops of absorbing states.
bool has_edge(const Matrix& P, std::size_t s, std::size_t t) {
  if (s == t && is_absorbing(P, s)) return false;
  return P(s, t) > 0.0;
}

}  // namespace

bool is_acyclic(const Ctmc& m) {
  const std::size_t n = m.size();
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::function<bool(std::size_t)> visit = [&](std::size_t s) {
    state[s] = 1;
    for (std::size_t t = 0; t < n; ++t) {
      if (!has_edge(m.P(), s, t)) continue;
      if (state[t] == 1) return false;
      if (state[t] == 0 && !visit(t)) return false;
    }
    state[s] = 2;
    return true;
  };
  for (std::size_t s = 0; s < n; ++s) {
    if (state[s] == 0 && !visit(s)) return false;
  }
  return true;
}

double acyclic_exact(const Ctmc& m, double delta, double t) {
  const std::size_t g = require_goal(m);
  const double rate = require_uniform_rate(m);
  if (!is_acyclic(m)) throw Error(ErrorKind::NotAcyclic, "chain has a cycle outside absorbing states");
  if (m.initial() == g || delta == 0.0) return 0.0;
  const std::size_t n = m.size();
  std::vector<std::ptrdiff_t> longest(n, -1);
  std::function<std::size_t(std::size_t)> depth = [&](std::size_t s) -> std::size_t {
    if (longest[s] >= 0) return static_cast<std::size_t>(longest[s]);
    std::size_t best = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (has_edge(m.P(), s, u)) best = std::max(best, depth(u) + 1);
    }
    longest[s] = static_cast<std::ptrdiff_t>(best);
    return best;
  };
  const std::size_t L = std::max<std::size_t>(depth(m.initial()), 1);
  const HitStepDistribution h = hit_exact_steps(m, L);
  const auto d = erlang_diff_sequence(L, std::exp(delta), rate * t);
  double sum = 0.0;
  for (std::size_t k = 1; k <= L; ++k) sum += h.probs[k - 1] * d[k];
  return sum;
}

CombinedBound combined_bound(const Ctmc& m, double delta, const std::vector<double>& grid, double tol,
                             const SpectralOptions& opts) {
  const std::size_t g = require_goal(m);
  const double rate = require_uniform_rate(m);
  CombinedBound cb;
  cb.erlang.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) cb.erlang[i] = erlang_N_bound(rate * grid[i], delta);
  if (m.initial() == g) {
    cb.spectral_kind = "acyclic";
    cb.spectral.assign(grid.size(), 0.0);
  } else if (is_acyclic(m)) {
    cb.spectral_kind = "acyclic";
    for (double t : grid) cb.spectral.push_back(acyclic_exact(m, delta, t));
  } else {
    try {
      const SpectralData sd = decompose(m.chain, opts);
      if (sd.kind == DecompositionKind::Diagonalizable) {
        cb.spectral = diag_bound(sd, rate, delta, grid, tol);
        cb.spectral_kind = "diag";
      } else {
        cb.spectral = jordan_bound(m, sd, delta, grid, tol);
        cb.spectral_kind = "jordan";
      }
    } catch (const Error& e) {
      if (!is_numerical(e.kind()) && e.kind() != ErrorKind::AcyclicChain) throw;
      cb.warnings.push_back(e.what());
      cb.spectral.clear();
      cb.spectral_kind.clear();
    }
  }
  cb.combined = cb.erlang;
  for (std::size_t i = 0; i < cb.spectral.size(); ++i) cb.combined[i] = std::min(cb.erlang[i], cb.spectral[i]);
  return cb;
}

std::vector<double> triangle_bound_eps_delta(const Ctmc& m, const Ctmc& n, double eps, double delta,
                                             const std::vector<double>& grid, double tol) {
  const std::size_t g = require_goal(m);
  const SplitResult split = split_construction(m, n, eps, delta);
  const double q = std::max(max_rate(m), max_rate(n));

  // Both split chains share their jump matrix, so the chain running at the
  // smaller of the two rates in every state is dominated by both, and its
  // e^delta acceleration dominates both.
  Ctmc slow = split.m_prime;
  slow.E = split.m_prime.E.cwiseMin(split.n_prime.E);
  slow = restrict_to_reachable(slow);
  std::vector<std::size_t> goals;
  for (std::size_t s = 0; s < slow.size(); ++s) {
    if (slow.chain.labels[s] == m.chain.labels[g]) goals.push_back(s);
  }
  std::vector<double> second(grid.size(), 0.0);
  if (!goals.empty()) {
    Ctmc target = normalize_goal(slow, goals);
    target = uniformize_ctmc(target, max_rate(target));
    second = combined_bound(target, delta, grid, tol).combined;
  }
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out[i] = std::min(1.0, uniformization_bound(eps, 0.0, q, grid[i]) + second[i]);
  }
  return out;
}

}  // namespace epsbisim
