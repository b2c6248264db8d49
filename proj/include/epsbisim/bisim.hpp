#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "epsbisim/model.hpp"

namespace epsbisim {

// Slack granted to the max-flow comparison.
inline constexpr double kFlowTolerance = 1e-9;
// Slack granted to |ln E(s) - ln E(s')| <= delta.
inline constexpr double kLogRateTolerance = 1e-12;

// Reflexive and symmetric by construction.
class PairRelation {
 public:
  PairRelation() = default;
  PairRelation(std::size_t n, double eps, double delta);

  std::size_t size() const { return n_; }
  bool related(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  void relate(std::size_t i, std::size_t j);
  void unrelate(std::size_t i, std::size_t j);

  // Off-diagonal pairs with i < j, lexicographic.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;
  std::vector<std::size_t> related_to(std::size_t i) const;

  bool is_transitive() const;
  PairRelation transitive_closure() const;
  bool subset_of(const PairRelation& other) const;
  bool operator==(const PairRelation& other) const { return n_ == other.n_ && bits_ == other.bits_; }

  double eps = 0.0;
  double delta = 0.0;

 private:
  std::size_t n_ = 0;
  std::vector<char> bits_;
};

// {"pairs": [["s0","s2"], ...], "eps": .., "delta": ..}, diagonal omitted.
nlohmann::ordered_json relation_to_json(const PairRelation& r, const std::vector<std::string>& ids);
PairRelation relation_from_json(const nlohmann::json& doc, const std::vector<std::string>& ids);

// Symmetric closure of R1;R2 and R2;R1 with summed tolerances.
PairRelation compose(const PairRelation& r1, const PairRelation& r2);

struct Partition {
  std::vector<std::vector<std::size_t>> blocks;

  std::vector<std::size_t> block_index(std::size_t n) const;
};

Partition strong_bisim(const Ctmc& m);
PairRelation relation_of(const Partition& p, std::size_t n, double eps = 0.0, double delta = 0.0);
// Classes of a transitive relation, ordered by smallest member.
Partition partition_of(const PairRelation& r);

// Largest mass placeable on related successor pairs of (s, t).
double related_flow(const Dtmc& d, const PairRelation& r, std::size_t s, std::size_t t);
bool check_pair_flow(const Dtmc& d, const PairRelation& r, std::size_t s, std::size_t t, double eps);

// Same labels, |ln E(s) - ln E(s')| <= delta and, for rewarded chains, equal
// rewards.
bool locally_compatible(const Ctmc& m, std::size_t s, std::size_t t, double delta);
PairRelation initial_relation(const Ctmc& m, double eps, double delta);
PairRelation epsilon_delta_bisim(const Ctmc& m, double eps, double delta);

struct BisimCheck {
  bool ok = true;
  std::optional<std::pair<std::size_t, std::size_t>> pair;
  std::string condition;  // "label", "reward", "delta" or "epsilon"
  std::string detail;
};

BisimCheck is_bisimulation(const Ctmc& m, const PairRelation& r);

struct Coupling {
  std::size_t source = 0;
  std::size_t target = 0;
  std::vector<std::size_t> succ_source;
  std::vector<std::size_t> succ_target;
  // weights(i, j) = Delta(succ_source[i], succ_target[j])
  Matrix weights;

  double weight(std::size_t s_next, std::size_t t_next) const;
};

Coupling extract_coupling(const Dtmc& d, const PairRelation& r, std::size_t s, std::size_t t, double eps);

struct CouplingReport {
  double row_error = 0.0;       // max |sum_j weights(i, j) - 1|
  double marginal_error = 0.0;  // max |sum_i P(s, s_i) weights(i, j) - P(t, t_j)|
  double related_mass = 0.0;
  bool min_entry_ok = true;
};
CouplingReport inspect_coupling(const Dtmc& d, const PairRelation& r, const Coupling& c);

// Smallest tau for which the partition is a tau-quasi-lumpability.
double quasi_lumpability_tau(const Ctmc& m, const Partition& p);
bool check_quasi_lumpability(const Ctmc& m, const Partition& p, double tau);

// Chain with states s, s', g, s_1..s_n such that {s, s'} is a block of a
// tau-quasi-lumpability while (s, s') violates both the eps- and the
// delta-condition.
std::size_t lumpability_counterexample_size(double eps, double delta, double tau);
Ctmc lumpability_counterexample(double eps, double delta, double tau);

struct SplitResult {
  Ctmc m_prime;
  Ctmc n_prime;
  PairRelation joint;  // the (eps, delta) relation on M + N
  BisimCheck m_to_m_prime;
  BisimCheck m_prime_to_n_prime;
  BisimCheck n_prime_to_n;

  bool verified() const { return m_to_m_prime.ok && m_prime_to_n_prime.ok && n_prime_to_n.ok; }
};

// Product chains on S^M x S^N; state (s, t) has index s * |S^N| + t.
SplitResult split_construction(const Ctmc& m, const Ctmc& n, double eps, double delta);

}  // namespace epsbisim
