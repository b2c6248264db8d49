#include "doctest.h"

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "epsbisim/error.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace epsbisim;
using namespace epsbisim::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(int (*cmd)(const cli::Options&, std::ostream&, std::ostream&), const cli::Options& o) {
  std::ostringstream out, err;
  const int code = cmd(o, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("check-bisim") {
  cli::Options o;
  o.model = fixture_path("split_m");
  o.model_b = fixture_path("split_n");
  o.eps = 0.1;
  o.delta = 0.2;
  const Run related = run(cli::check_bisim, o);
  CHECK(related.code == 0);
  const auto doc = nlohmann::json::parse(related.out);
  CHECK(doc["initial_related"] == true);
  bool has_pair = false;
  for (const auto& p : doc["relation"]["pairs"]) has_pair |= p[0] == "s0" && p[1] == "t0";
  CHECK(has_pair);

  o.model = fixture_path("quasi_m1");
  o.model_b = fixture_path("quasi_m3");
  o.eps = 0.05;
  o.delta = 0.05;
  o.explain = true;
  const Run unrelated = run(cli::check_bisim, o);
  CHECK(unrelated.code == 1);
  CHECK(!nlohmann::json::parse(unrelated.out)["unrelated"].empty());

  cli::Options self;
  self.model = fixture_path("relation_fixture");
  const auto rel = nlohmann::json::parse(run(cli::check_bisim, self).out);
  CHECK(rel["relation"]["pairs"].empty());
}

TEST_CASE("bounds") {
  cli::Options o;
  o.model = fixture_path("four_state");
  o.delta = 0.1;
  o.tmax = 30;
  o.steps = 60;
  o.which = "exact,unif,erlangN,markov";
  const Run full = run(cli::bounds, o);
  CHECK(full.code == 0);
  const auto rows = lines(full.out);
  CHECK(rows.front() == "t,exact,unif,erlangN,markov");
  CHECK(rows.size() == 62);
  CHECK(run(cli::bounds, o).out == full.out);

  o.which = "unif";
  CHECK(lines(run(cli::bounds, o).out).front() == "t,unif");

  o.model = fixture_path("defective");
  o.which = "exact,markov";
  const Run partial = run(cli::bounds, o);
  CHECK(partial.err.find("markov") != std::string::npos);
  CHECK(lines(partial.out)[1].back() == ',');

  o.which = "nonsense";
  CHECK_THROWS_AS(run(cli::bounds, o), Error);
}

TEST_CASE("bounds output matches the stored curves") {
  auto cells = [](const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string c; std::getline(in, c, ',');) out.push_back(c);
    return out;
  };
  for (const char* name : {"four_state", "queue1", "queue2", "queue3"}) {
    CAPTURE(name);
    cli::Options o;
    o.model = fixture_path(name);
    o.delta = 0.1;
    o.tmax = 30.0;
    o.steps = 60;
    o.which = "exact,erlangN,markov,combined";
    const auto got = lines(run(cli::bounds, o).out);
    std::ifstream in(std::string(EPSBISIM_DATA_DIR) + "/curves/" + name + ".csv");
    REQUIRE(in);
    std::vector<std::string> want;
    for (std::string l; std::getline(in, l);) want.push_back(l);
    REQUIRE(got.size() == want.size());
    CHECK(got[0] == want[0]);
    for (std::size_t i = 1; i < got.size(); ++i) {
      const auto a = cells(got[i]);
      const auto b = cells(want[i]);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::stod(a[k]) == doctest::Approx(std::stod(b[k])).epsilon(1e-9));
    }
  }
}

TEST_CASE("pareto") {
  cli::Options o;
  o.theta = 0.0;
  CHECK(run(cli::pareto, o).out == "delta,eps,bound,ok\n0,0,0,1\n");
  o.theta = 0.1;
  const auto rows = lines(run(cli::pareto, o).out);
  CHECK(rows.size() == 12);
  CHECK(rows[1].rfind("0,0.10536051565782", 0) == 0);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].back() == '1');
}

TEST_CASE("other commands") {
  cli::Options o;
  o.model = fixture_path("rewards_mixed");
  o.bound = 2.0;
  const auto rr = nlohmann::json::parse(run(cli::reward_reach, o).out);
  CHECK(rr["probability"].get<double>() > 0.0);

  cli::Options pu;
  pu.model = fixture_path("pair_m");
  pu.model_b = fixture_path("pair_n");
  pu.relation = fixture_path("pair_relation");
  pu.delta = 0.26236426446749106;
  const Run p = run(cli::pair_uniformize, pu);
  CHECK(p.code == 0);
  CHECK(nlohmann::json::parse(p.out)["relation_holds"] == true);

  cli::Options sr;
  sr.model = fixture_path("four_state");
  const auto rep = nlohmann::json::parse(run(cli::spectral_report, sr).out);
  CHECK(rep["kind"] == "diagonalizable");
  CHECK(rep["lambda_modulus"].get<double>() == doctest::Approx(0.5));

  const auto table = lines(run(cli::pn, sr).out);
  CHECK(table.front() == "n,oracle,formula,abs_error");
  CHECK(table.size() == 31);

  cli::Options sim;
  sim.model = fixture_path("queue2");
  sim.t = 5.0;
  sim.paths = 20000;
  const std::string first = run(cli::simulate, sim).out;
  CHECK(first == run(cli::simulate, sim).out);

  cli::Options missing;
  missing.model = fixture_path("no_such_model");
  CHECK_THROWS_AS(run(cli::spectral_report, missing), Error);
}
