#include "doctest.h"

#include <cmath>
#include <fstream>

#include "epsbisim/pairuniform.hpp"
#include "epsbisim/transient.hpp"
#include "support.hpp"

using namespace epsbisim;
using namespace epsbisim::testing;

namespace {

PairRelation load_relation(const Ctmc& m, const Ctmc& n) {
  std::ifstream in(fixture_path("pair_relation"));
  return relation_from_json(nlohmann::json::parse(in), direct_sum(m, n).chain.ids);
}

PairRelation isomorphism(std::size_t n, double delta) {
  PairRelation r(2 * n, 0.0, delta);
  for (std::size_t i = 0; i < n; ++i) r.relate(i, n + i);
  return r;
}

void check_uniform(const PairUniformization& pu) {
  for (Eigen::Index i = 0; i < pu.m_prime.E.size(); ++i) CHECK(pu.m_prime.E(i) == pu.q_m);
  for (Eigen::Index i = 0; i < pu.n_prime.E.size(); ++i) CHECK(pu.n_prime.E(i) == pu.q_n);
}

}  // namespace

TEST_CASE("a scaled copy is already flat") {
  const Ctmc m = fixture("queue2");
  const double delta = 0.2;
  const Ctmc n = scale(m, std::exp(delta));
  const PairUniformization pu = uniformize_pair(m, n, isomorphism(m.size(), delta), delta);
  check_uniform(pu);
  CHECK(pu.q_m == 1.0);
  CHECK(pu.q_n == doctest::Approx(std::exp(delta)).epsilon(1e-15));
  CHECK(pu.m_prime.P() == uniformize(m, 1.0).P);
  CHECK(pu.recheck.ok);
}

TEST_CASE("mixed-rate pair") {
  const Ctmc m = fixture("pair_m");
  const Ctmc n = fixture("pair_n");
  const double delta = std::log(1.3);
  const PairUniformization pu = uniformize_pair(m, n, load_relation(m, n), delta);
  check_uniform(pu);
  CHECK(pu.q_n / pu.q_m == doctest::Approx(std::exp(delta)).epsilon(1e-15));
  CHECK(pu.recheck.ok);
  REQUIRE(pu.ordering_checked);
  CHECK(pu.ordering_holds);
  CHECK(pu.warnings.empty());
  for (double t : kOrderingGrid) {
    const double a = timed_reach(pu.m_prime, pu.m_prime.initial(), t, 1e-12);
    const double b = timed_reach(m, m.initial(), t, 1e-12);
    const double c = timed_reach(n, n.initial(), t, 1e-12);
    const double d = timed_reach(pu.n_prime, pu.n_prime.initial(), t, 1e-12);
    CHECK(a <= b + 1e-9);
    CHECK(b <= c + 1e-9);
    CHECK(c <= d + 1e-9);
  }
}

TEST_CASE("jump probabilities shift into the self-loop") {
  const Ctmc m = fixture("pair_m");
  const Ctmc n = fixture("pair_n");
  const PairUniformization pu = uniformize_pair(m, n, load_relation(m, n), std::log(1.3));
  // Every class keeps the slowest M rate, here 1.
  for (std::size_t s = 0; s < m.size(); ++s) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j == s) continue;
      CHECK(pu.m_prime.P()(s, j) == doctest::Approx(1.0 / pu.q_m * m.P()(s, j)));
    }
  }
}

TEST_CASE("rejected inputs") {
  const Ctmc m = fixture("pair_m");
  const Ctmc n = fixture("pair_n");
  PairRelation r = load_relation(m, n);
  PairRelation partial(r.size(), 0.0, r.delta);
  partial.relate(0, 1);
  partial.relate(1, 3);
  CHECK_THROWS_WITH_AS(uniformize_pair(m, n, partial, r.delta), doctest::Contains("transitive"), Error);
  CHECK_THROWS_AS(uniformize_pair(m, n, r, 0.01), Error);
}

TEST_CASE("violated input ordering is reported, not guessed") {
  const Ctmc m = fixture("pair_n");
  const Ctmc n = fixture("pair_m");
  PairRelation r(6, 0.0, std::log(1.3));
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {0, 3}, {0, 4}, {1, 3}, {1, 4}, {3, 4}, {2, 5}}) r.relate(a, b);
  const PairUniformization pu = uniformize_pair(m, n, r, std::log(1.3));
  CHECK_FALSE(pu.ordering_checked);
  REQUIRE_FALSE(pu.warnings.empty());
  CHECK(pu.warnings.front().rfind("OrderingAssumptionViolated", 0) == 0);
  check_uniform(pu);
}
