#include "support.hpp"

#include <algorithm>
#include <cmath>

#include "epsbisim/model_io.hpp"

#ifndef EPSBISIM_DATA_DIR
#error "EPSBISIM_DATA_DIR must point at the fixture directory"
#endif

namespace epsbisim::testing {

std::string fixture_path(const std::string& name) { return std::string(EPSBISIM_DATA_DIR) + "/" + name + ".json"; }

Ctmc fixture(const std::string& name) { return load_model(fixture_path(name)); }

Ctmc erlang(std::size_t n, double rate) {
  CtmcBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.state("s" + std::to_string(i), {}, rate);
  b.state("g", {"g"}, rate);
  for (std::size_t i = 0; i < n; ++i) b.edge("s" + std::to_string(i), i + 1 < n ? "s" + std::to_string(i + 1) : "g", 1.0);
  b.edge("g", "g", 1.0);
  return b.initial(n ? "s0" : "g").goal("g").build();
}

Ctmc loop_chain(double p, double rate) {
  CtmcBuilder b;
  b.state("s", {}, rate);
  b.state("g", {"g"}, rate);
  b.edge("s", "s", p).edge("s", "g", 1.0 - p).edge("g", "g", 1.0);
  return b.initial("s").goal("g").build();
}

Ctmc from_matrix(const Matrix& P, const Vector& E, std::size_t initial, std::optional<std::size_t> goal,
                 std::optional<std::size_t> fail) {
  const auto n = static_cast<std::size_t>(P.rows());
  CtmcBuilder b;
  auto id = [&](std::size_t i) {
    if (goal && i == *goal) return std::string("g");
    if (fail && i == *fail) return std::string("f");
    return "s" + std::to_string(i);
  };
  for (std::size_t i = 0; i < n; ++i) b.state(id(i), {id(i)}, E(i));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (P(i, j) > 0.0) b.edge(id(i), id(j), P(i, j));
    }
  }
  b.initial(id(initial));
  if (goal) b.goal(id(*goal));
  if (fail) b.fail(id(*fail));
  return b.build();
}

namespace {

void normalize_row(Matrix& P, Eigen::Index i) {
  const double s = P.row(i).sum();
  P.row(i) /= s;
  // Exact row sums: push the rounding residue onto the largest entry.
  Eigen::Index k;
  P.row(i).maxCoeff(&k);
  P(i, k) += 1.0 - P.row(i).sum();
}

}  // namespace

Ctmc random_goal_chain(Rng& rng, std::size_t n, bool fail, double rate) {
  const std::size_t absorbing = fail ? 2 : 1;
  const std::size_t transient = n - absorbing;
  const std::size_t g = transient;
  Matrix P = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<std::size_t> extra(0, 2);
  for (std::size_t i = 0; i < transient; ++i) {
    P(i, i + 1 < transient ? i + 1 : g) += weight(rng);
    for (std::size_t k = extra(rng); k > 0; --k) P(i, pick(rng)) += weight(rng);
    normalize_row(P, static_cast<Eigen::Index>(i));
  }
  for (std::size_t i = transient; i < n; ++i) P(i, i) = 1.0;
  return from_matrix(P, Vector::Constant(static_cast<Eigen::Index>(n), rate), 0, g,
                     fail ? std::optional<std::size_t>(n - 1) : std::nullopt);
}

Ctmc random_labeled_chain(Rng& rng, std::size_t n) {
  static const double kRates[] = {1.0, std::exp(0.1), std::exp(0.2)};
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> rate(0, 2);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<int> quarters(1, 4);
  CtmcBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.state("x" + std::to_string(i), {coin(rng) ? "a" : "b"}, kRates[rate(rng)]);
  for (std::size_t i = 0; i < n; ++i) {
    int left = 4;
    while (left > 0) {
      const int q = std::min(left, quarters(rng));
      b.edge("x" + std::to_string(i), "x" + std::to_string(pick(rng)), 0.25 * q);
      left -= q;
    }
  }
  return b.initial("x0").build();
}

Ctmc perturbed_copy(const Ctmc& m, Rng& rng, double eps, double delta) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
  Ctmc out = m;
  out.rate_text.clear();
  for (std::size_t s = 0; s < m.size(); ++s) {
    out.E(s) = m.E(s) * std::exp(delta * u(rng));
    if (m.chain.goal == s || m.chain.fail == s) continue;
    std::vector<Eigen::Index> succ;
    for (Eigen::Index j = 0; j < m.P().cols(); ++j) {
      if (m.P()(s, j) > 0.0) succ.push_back(j);
    }
    const Eigen::Index from = succ[pick(rng) % succ.size()];
    const auto to = static_cast<Eigen::Index>(pick(rng));
    const double moved = std::min(m.P()(s, from), eps * u(rng));
    out.chain.P(s, from) -= moved;
    out.chain.P(s, to) += moved;
  }
  return out;
}

Ctmc random_rewarded_chain(Rng& rng, std::size_t n) {
  static const double kRewards[] = {0.0, 0.5, 1.0, 2.0};
  std::uniform_int_distribution<int> reward(0, 3);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::uniform_int_distribution<std::size_t> extra(0, 2);
  const std::size_t g = n - 1;
  std::vector<double> rho(n);
  for (std::size_t i = 0; i < g; ++i) rho[i] = kRewards[reward(rng)];
  rho[g] = 1.0;
  Matrix P = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < g; ++i) {
    P(i, i + 1) += weight(rng);
    for (std::size_t k = extra(rng); k > 0; --k) {
      // Zero-reward states only move forward (or loop), so zero-reward
      // states never form a cycle.
      std::uniform_int_distribution<std::size_t> pick(rho[i] == 0.0 ? i : 0, n - 1);
      std::size_t j = pick(rng);
      if (j < i && rho[j] == 0.0) j = g;
      P(i, j) += weight(rng);
    }
    normalize_row(P, static_cast<Eigen::Index>(i));
  }
  P(g, g) = 1.0;
  std::uniform_real_distribution<double> rate(0.5, 2.0);
  Vector E(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) E(i) = rate(rng);
  Ctmc m = from_matrix(P, E, 0, g);
  m.rewards = Vector(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) (*m.rewards)(i) = rho[i];
  return m;
}

Ctmc relation_chain(double eps, double delta) {
  CtmcBuilder b;
  b.state("s0", {"a"}, 1.0);
  b.state("s1", {"a"}, std::exp(-delta));
  b.state("s2", {"a"}, std::exp(delta));
  b.state("s3", {"a"}, std::exp(delta / 2));
  b.state("s4", {"a"}, std::exp(-1.5 * delta));
  b.state("g", {"b"}, 1.0);
  b.edge("s0", "s1", 1.0 / 6).edge("s0", "s3", 1.0 / 3).edge("s0", "s2", 0.5);
  b.edge("s1", "s1", 1 - eps).edge("s1", "g", eps);
  b.edge("s2", "s2", 5.0 / 6 - eps).edge("s2", "s1", 1.0 / 6 + eps);
  b.edge("s3", "s3", 5.0 / 6).edge("s3", "s4", 1.0 / 6);
  b.edge("s4", "s4", 1 - eps / 2).edge("s4", "s3", eps / 2);
  b.edge("g", "g", 1.0);
  return b.initial("s0").goal("g").build();
}

Ctmc three_absorbing() {
  CtmcBuilder b;
  for (const char* s : {"a", "b", "c"}) b.state(s, {}, 1.0);
  b.state("g", {"g"}, 1.0);
  b.state("f", {"f"}, 1.0);
  b.state("trap", {"trap"}, 1.0);
  b.edge("a", "b", 0.5).edge("a", "c", 0.3).edge("a", "trap", 0.2);
  b.edge("b", "a", 0.2).edge("b", "g", 0.5).edge("b", "b", 0.3);
  b.edge("c", "f", 0.4).edge("c", "g", 0.4).edge("c", "a", 0.2);
  for (const char* s : {"g", "f", "trap"}) b.edge(s, s, 1.0);
  return b.initial("a").goal("g").fail("f").build();
}

std::vector<double> grid(double tmax, std::size_t points) { return linear_grid(tmax, points - 1); }

TransientQuery query(std::size_t start, double t, double truncation_error) {
  TransientQuery q;
  q.start = start;
  q.t = t;
  q.truncation_error = truncation_error;
  return q;
}

}  // namespace epsbisim::testing
