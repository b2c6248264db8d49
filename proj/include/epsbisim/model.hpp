#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "epsbisim/error.hpp"

namespace epsbisim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using LabelSet = std::set<std::string>;

inline constexpr double kRowSumTolerance = 1e-12;

struct Dtmc {
  std::vector<std::string> ids;
  std::vector<LabelSet> labels;
  Matrix P;
  std::size_t initial = 0;
  std::optional<std::size_t> goal;
  std::optional<std::size_t> fail;

  std::size_t size() const { return ids.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;
  std::size_t require_index(std::string_view id) const;
};

struct Ctmc {
  Dtmc chain;
  Vector E;
  std::optional<Vector> rewards;
  // Textual exit rate per state as read from a model file ("exp(0.5)"),
  // empty when the rate is a plain number. May be empty altogether.
  std::vector<std::string> rate_text;

  std::size_t size() const { return chain.size(); }
  const Matrix& P() const { return chain.P; }
  std::optional<std::size_t> goal() const { return chain.goal; }
  std::optional<std::size_t> fail() const { return chain.fail; }
  std::size_t initial() const { return chain.initial; }
};

struct Violation {
  ErrorKind kind;
  std::size_t state;
  std::string detail;
};

std::vector<Violation> violations(const Dtmc& d, double tol = kRowSumTolerance);
std::vector<Violation> violations(const Ctmc& m, double tol = kRowSumTolerance);

// Throws Error carrying the kind of the first violation and a message that
// lists every violation.
const Ctmc& validate(const Ctmc& m, double tol = kRowSumTolerance);
const Dtmc& validate(const Dtmc& d, double tol = kRowSumTolerance);

Matrix generator(const Ctmc& m);

// States of N are shifted by M.size(); the initial state is M's.
// Goal and fail markers are kept only for M.
Ctmc direct_sum(const Ctmc& m, const Ctmc& n);

Ctmc scale(const Ctmc& m, double c);

// Merges `goals` into one absorbing goal state and every state that cannot
// reach it into one absorbing fail state.
Ctmc normalize_goal(const Ctmc& m, const std::vector<std::size_t>& goals);

Dtmc uniformize(const Ctmc& m, double q);
// Same transition matrix as uniformize(m, q), wrapped as a CTMC whose states
// all have exit rate q.
Ctmc uniformize_ctmc(const Ctmc& m, double q);

Dtmc embedded_dtmc(const Ctmc& m);

double max_rate(const Ctmc& m);
// Returns the common exit rate if all rates agree to relative 1e-12.
std::optional<double> uniform_rate(const Ctmc& m);

std::vector<bool> reachable_from(const Matrix& P, std::size_t s);
std::vector<bool> can_reach(const Matrix& P, std::size_t target);
bool is_absorbing(const Matrix& P, std::size_t s);

// Drops states not reachable from the initial state.
Ctmc restrict_to_reachable(const Ctmc& m);
Ctmc with_initial(const Ctmc& m, std::size_t s);

class CtmcBuilder {
 public:
  std::size_t state(const std::string& id, LabelSet labels, double rate,
                    std::optional<double> reward = std::nullopt);
  CtmcBuilder& edge(const std::string& from, const std::string& to, double prob);
  CtmcBuilder& initial(const std::string& id);
  CtmcBuilder& goal(const std::string& id);
  CtmcBuilder& fail(const std::string& id);
  CtmcBuilder& rate_text(const std::string& id, const std::string& text);

  // Builds and validates.
  Ctmc build() const;
  Ctmc build_unchecked() const;

 private:
  std::size_t index(const std::string& id) const;

  std::vector<std::string> ids_;
  std::vector<LabelSet> labels_;
  std::vector<double> rates_;
  std::vector<std::optional<double>> rewards_;
  std::vector<std::string> rate_text_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges_;
  std::string initial_;
  std::string goal_;
  std::string fail_;
};

}  // namespace epsbisim
