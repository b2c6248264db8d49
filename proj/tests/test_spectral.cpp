#include "doctest.h"

#include <cmath>

#include "epsbisim/bisim.hpp"
#include "epsbisim/erlang.hpp"
#include "epsbisim/spectral.hpp"
#include "epsbisim/transient.hpp"
#include "support.hpp"

using namespace epsbisim;
using namespace epsbisim::testing;

namespace {

double pn(const SpectralData& sd, std::size_t k) {
  return sd.kind == DecompositionKind::Diagonalizable ? pn_diag(sd, k) : pn_jordan(sd, k);
}

void check_oracle(const Ctmc& m, std::size_t nmax, double tol) {
  const SpectralData sd = decompose(m.chain);
  const auto h = hit_exact_steps(m, nmax);
  for (std::size_t n = 1; n <= nmax; ++n) CHECK(std::abs(pn(sd, n - 1) - h.probs[n - 1]) <= tol);
}

double reconstruction_error(const SpectralData& sd, const Matrix& P) {
  return (sd.S * sd.jordan_matrix() * sd.S_inv - P.cast<Complex>()).cwiseAbs().maxCoeff();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Parse;
}


}  // namespace

TEST_CASE("decomposition examples") {
  const SpectralData e2 = decompose(erlang(2).chain);
  CHECK(e2.kind == DecompositionKind::Jordan);
  CHECK(e2.z == 1);
  CHECK(e2.aP == 1);

  const SpectralData four = decompose(fixture("four_state").chain);
  CHECK(four.kind == DecompositionKind::Diagonalizable);
  CHECK(std::abs(std::abs(four.lambda) - 0.5) <= 1e-9);
  CHECK(four.eigenvalues[0] == Complex(1.0, 0.0));

  CHECK(std::abs(std::abs(decompose(fixture("queue1").chain).lambda) - 0.7334) <= 5e-4);
  CHECK(std::abs(std::abs(decompose(fixture("queue3").chain).lambda) - 0.9778) <= 5e-4);

  const SpectralData def = decompose(fixture("defective").chain);
  CHECK(def.kind == DecompositionKind::Jordan);
  CHECK(def.aP == 2);
  CHECK(jordan_constants(def).r == 2);
}

TEST_CASE("eigenvalues are ordered and reconstruct the matrix") {
  for (const char* name : {"four_state", "queue1", "queue2", "queue3", "defective", "erlang4"}) {
    const Ctmc m = fixture(name);
    const SpectralData sd = decompose(m.chain);
    CHECK(reconstruction_error(sd, m.P()) <= 1e-8);
    for (std::size_t i = 1; i < sd.size(); ++i) CHECK(std::abs(sd.eigenvalues[i]) <= std::abs(sd.eigenvalues[i - 1]) + 1e-12);
    for (auto v : sd.eigenvalues) CHECK(std::abs(v) <= 1.0 + 1e-12);
  }
}

TEST_CASE("periodic chains are rejected") {
  CtmcBuilder b;
  b.state("a", {}, 1.0);
  b.state("b", {}, 1.0);
  b.state("g", {"g"}, 1.0);
  b.edge("a", "b", 1.0).edge("b", "a", 1.0).edge("g", "g", 1.0);
  const Ctmc m = b.initial("a").goal("g").build();
  CHECK(kind_of([&] { decompose(m.chain); }) == ErrorKind::ModulusOneNotOne);
  CHECK(is_numerical(ErrorKind::ModulusOneNotOne));
}

TEST_CASE("p_n from an eigendecomposition") {
  for (double p : {0.2, 0.5, 0.9}) {
    const SpectralData sd = decompose(loop_chain(p).chain);
    for (std::size_t k = 1; k <= 20; ++k) CHECK(pn_diag(sd, k - 1) == doctest::Approx((1 - p) * std::pow(p, k - 1)));
  }
  check_oracle(fixture("four_state"), 21, 1e-9);

  CtmcBuilder b;
  b.state("s0", {}, 1.0);
  b.state("s1", {}, 1.0);
  b.state("g", {"g"}, 1.0);
  b.state("f", {"f"}, 1.0);
  b.edge("s0", "s1", 0.6).edge("s0", "f", 0.1).edge("s0", "s0", 0.3);
  b.edge("s1", "g", 0.5).edge("s1", "s0", 0.3).edge("s1", "f", 0.2);
  b.edge("g", "g", 1.0).edge("f", "f", 1.0);
  const Ctmc with_fail = b.initial("s0").goal("g").fail("f").build();
  const SpectralData sd = decompose(with_fail.chain);
  CHECK(sd.aP == 2);
  check_oracle(with_fail, 30, 1e-9);
  CHECK_THROWS_AS(pn_diag(decompose(erlang(3).chain), 0), Error);
}

TEST_CASE("p_n from a Jordan decomposition") {
  const SpectralData e4 = decompose(erlang(4).chain);
  REQUIRE(e4.kind == DecompositionKind::Jordan);
  for (std::size_t n = 1; n <= 10; ++n) CHECK(pn_jordan(e4, n - 1) == doctest::Approx(n == 4 ? 1.0 : 0.0));
  check_oracle(fixture("defective"), 30, 1e-8);

  const SpectralData four = decompose(fixture("four_state").chain);
  const SpectralData as_j = as_jordan(four);
  for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(pn_jordan(as_j, k) - pn_diag(four, k)) <= 1e-10);
  CHECK_THROWS_AS(pn_jordan(four, 0), Error);
}

TEST_CASE("p_n formulas match the oracle on random chains") {
  Rng rng(909);
  int accepted = 0;
  for (int trial = 0; accepted < 50 && trial < 500; ++trial) {
    std::uniform_int_distribution<std::size_t> size(3, 8);
    const Ctmc m = random_goal_chain(rng, size(rng), trial % 2 == 1);
    try {
      decompose(m.chain);
    } catch (const Error& e) {
      if (is_numerical(e.kind())) continue;
      throw;
    }
    check_oracle(m, 30, 1e-7);
    ++accepted;
  }
  CHECK(accepted == 50);
  const Ctmc three = three_absorbing();
  CHECK(decompose(three.chain).aP == 3);
  check_oracle(three, 30, 1e-7);
}

TEST_CASE("diagonal bound") {
  const double delta = 0.1;
  const auto g = grid(30.0, 61);
  const Ctmc loop = loop_chain(0.6);
  const auto tight = diag_bound(loop, delta, g);
  const auto exact = diff_curve(loop, std::exp(delta), g, 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(tight[i] - exact[i]) <= 2e-9);

  const Ctmc four = fixture("four_state");
  const auto b = diag_bound(four, delta, g);
  const auto e = diff_curve(four, std::exp(delta), g, 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(b[i] >= e[i] - 1e-9);
  CHECK(diag_bound(four, delta, {30.0})[0] < diag_bound(four, delta, {5.0})[0]);

  const Ctmc q3 = fixture("queue3");
  CHECK(diag_bound(q3, delta, {50.0})[0] > 0.01 * diag_bound(q3, delta, {5.0})[0]);
  CHECK_THROWS_AS(diag_bound(fixture("defective"), delta, g), Error);
}

TEST_CASE("diagonal bound decays after its peak") {
  for (const char* name : {"four_state", "queue1", "queue2", "queue3"}) {
    const Ctmc m = fixture(name);
    const auto g = grid(60.0, 601);
    const auto b = diag_bound(m, 0.1, g);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (b[i] > b[peak]) peak = i;
    }
    CHECK(diag_bound(m, 0.1, {10 * g[peak]})[0] < 0.05 * b[peak]);
  }
}

TEST_CASE("Jordan bound") {
  const double delta = 0.1;
  const auto g = grid(30.0, 31);
  const Ctmc four = fixture("four_state");
  const auto j = jordan_bound(four, delta, g);
  const auto d = diag_bound(four, delta, g);
  // Same series with a different constant, except that the first step is
  // exact because four_state has a size-1 block at eigenvalue 0.
  const SpectralData sd = decompose(four.chain);
  REQUIRE(sd.z == 1);
  const double cj = jordan_constants(sd).C;
  const double cd = diag_constants(sd).factor;
  const double p1 = hit_exact_steps(four, 1).probs[0];
  const double rate = *uniform_rate(four);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d1 = erlang_diff(1, std::exp(delta), rate * g[i]);
    const double expected = p1 * d1 + cj * (d[i] / cd - d1);
    CHECK(std::abs(j[i] - expected) <= 1e-9 * std::max(1.0, cj));
  }
  CHECK(jordan_constants(sd).R == 1);
  CHECK(jordan_constants(sd).r == 1);

  const Ctmc def = fixture("defective");
  const auto jb = jordan_bound(def, delta, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(jb[i] >= exact_diff_series(def, delta, g[i]) - 1e-9);
  CHECK(jb[0] == 0.0);
  CHECK(kind_of([&] { jordan_bound(erlang(4), delta, g); }) == ErrorKind::AcyclicChain);
}

TEST_CASE("Jordan bound with a nilpotent block") {
  // Transient part has a 2x2 block at eigenvalue 0 next to a loop at 1/2, so
  // the two-step hit mass exceeds what the loop alone explains.
  Matrix P = Matrix::Zero(4, 4);
  P(0, 1) = 0.5;
  P(0, 2) = 0.5;
  P(1, 3) = 1.0;
  P(2, 2) = 0.5;
  P(2, 3) = 0.5;
  P(3, 3) = 1.0;
  const Ctmc m = from_matrix(P, Vector::Ones(4), 0, 3);
  const SpectralData sd = decompose(m.chain);
  CHECK(sd.z == 1);
  const auto g = grid(20.0, 41);
  const auto jb = jordan_bound(m, 0.1, g);
  const auto exact = diff_curve(m, std::exp(0.1), g, 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(exact[i] <= jb[i] + 1e-9);
}

TEST_CASE("acyclic chains") {
  const double delta = 0.1, c = std::exp(delta);
  CHECK(is_acyclic(erlang(4)));
  CHECK_FALSE(is_acyclic(fixture("four_state")));
  for (double t : {0.5, 3.0, 9.0}) CHECK(acyclic_exact(erlang(4), delta, t) == doctest::Approx(erlang_diff(4, c, t)));

  CtmcBuilder b;
  b.state("s", {}, 1.0);
  for (const char* x : {"a1", "b1", "b2"}) b.state(x, {}, 1.0);
  b.state("g", {"g"}, 1.0);
  b.edge("s", "a1", 0.3).edge("s", "b1", 0.7).edge("a1", "g", 1.0).edge("b1", "b2", 1.0).edge("b2", "g", 1.0);
  b.edge("g", "g", 1.0);
  const Ctmc branches = b.initial("s").goal("g").build();
  for (double t : {0.5, 3.0, 9.0}) {
    const double expected = 0.3 * erlang_diff(2, c, t) + 0.7 * erlang_diff(3, c, t);
    CHECK(acyclic_exact(branches, delta, t) == doctest::Approx(expected));
    CHECK(acyclic_exact(branches, delta, t) == doctest::Approx(diff_curve(branches, c, {t}, 1e-12)[0]).epsilon(1e-8));
  }
  CHECK_THROWS_AS(acyclic_exact(fixture("four_state"), delta, 1.0), Error);
}

TEST_CASE("combined bound") {
  const double delta = 0.1;
  const auto g = grid(30.0, 61);
  const Ctmc four = fixture("four_state");
  const CombinedBound cb = combined_bound(four, delta, g);
  CHECK(cb.spectral_kind == "diag");
  CHECK(cb.combined[0] == 0.0);
  bool erlang_first = false, spectral_later = false;
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(cb.combined[i] == std::min(cb.erlang[i], cb.spectral[i]));
    if (g[i] <= 2.0 && cb.erlang[i] < cb.spectral[i]) erlang_first = true;
    if (g[i] >= 20.0 && cb.spectral[i] < cb.erlang[i]) spectral_later = true;
  }
  CHECK(erlang_first);
  CHECK(spectral_later);

  CHECK(combined_bound(erlang(4), delta, g).spectral_kind == "acyclic");
  CHECK(combined_bound(fixture("defective"), delta, g).spectral_kind == "jordan");

  for (const char* name : {"four_state", "queue1", "queue2", "queue3", "defective", "erlang4"}) {
    const Ctmc m = fixture(name);
    const auto exact = diff_curve(m, std::exp(delta), g, 1e-12);
    const auto comb = combined_bound(m, delta, g).combined;
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(exact[i] <= comb[i] + 1e-9);
  }
}

TEST_CASE("triangle bound for eps and delta together") {
  const Ctmc m = fixture("split_m");
  const Ctmc n_raw = fixture("split_n");
  const auto g = grid(20.0, 41);

  const auto only_eps = triangle_bound_eps_delta(m, m, 0.1, 0.0, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(only_eps[i] - uniformization_bound(0.1, 0.0, max_rate(m), g[i])) <= 1e-12);

  const auto curve = triangle_bound_eps_delta(m, n_raw, 0.1, 0.2, g);
  const Ctmc n = normalize_goal(n_raw, {n_raw.chain.require_index("t2")});
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double gap = std::abs(timed_reach(m, m.initial(), g[i], 1e-12) - timed_reach(n, n.initial(), g[i], 1e-12));
    CHECK(gap <= curve[i] + 1e-9);
    CHECK(curve[i] <= 1.0);
  }
  CHECK_THROWS_AS(triangle_bound_eps_delta(fixture("quasi_m1"), fixture("quasi_m3"), 0.01, 0.01, g), Error);
}
