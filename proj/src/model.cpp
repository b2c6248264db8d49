#include "epsbisim/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace epsbisim {

std::optional<std::size_t> Dtmc::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return i;
  }
  return std::nullopt;
}

std::size_t Dtmc::require_index(std::string_view id) const {
  auto idx = index_of(id);
  if (!idx) throw Error(ErrorKind::InvalidState, "unknown state '" + std::string(id) + "'");
  return *idx;
}

bool is_absorbing(const Matrix& P, std::size_t s) {
  return P(s, s) >= 1.0 - kRowSumTolerance;
}

namespace {

bool label_unique(const Dtmc& d, std::size_t s) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i != s && d.labels[i] == d.labels[s]) return false;
  }
  return true;
}

void check_marker(const Dtmc& d, std::optional<std::size_t> marker, const char* what,
                  std::vector<Violation>& out) {
  if (!marker) return;
  std::size_t s = *marker;
  if (s >= d.size()) {
    out.push_back({ErrorKind::InvalidState, s, std::string(what) + " index out of range"});
    return;
  }
  if (!is_absorbing(d.P, s)) {
    out.push_back({ErrorKind::NonAbsorbingGoal, s,
                   std::string(what) + " state '" + d.ids[s] + "' is not absorbing"});
  }
  if (!label_unique(d, s)) {
    out.push_back({ErrorKind::GoalLabelNotUnique, s,
                   std::string(what) + " state '" + d.ids[s] + "' shares its labels"});
  }
}

}  // namespace

std::vector<Violation> violations(const Dtmc& d, double tol) {
  std::vector<Violation> out;
  const std::size_t n = d.size();
  if (static_cast<std::size_t>(d.P.rows()) != n || static_cast<std::size_t>(d.P.cols()) != n ||
      d.labels.size() != n) {
    out.push_back({ErrorKind::InvalidState, 0, "dimension mismatch"});
    return out;
  }
  for (std::size_t s = 0; s < n; ++s) {
    double sum = 0.0;
    bool range_ok = true;
    for (std::size_t j = 0; j < n; ++j) {
      double p = d.P(s, j);
      if (!(p >= 0.0 && p <= 1.0 + tol)) range_ok = false;
      sum += p;
    }
    if (!range_ok) {
      out.push_back({ErrorKind::RowSumError, s, "row of '" + d.ids[s] + "' has an entry outside [0,1]"});
    } else if (std::abs(sum - 1.0) > tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row of '" << d.ids[s] << "' sums to " << sum;
      out.push_back({ErrorKind::RowSumError, s, msg.str()});
    }
  }
  if (n == 0) {
    out.push_back({ErrorKind::InvalidState, 0, "chain has no states"});
    return out;
  }
  if (d.initial >= n) out.push_back({ErrorKind::InvalidState, d.initial, "initial state out of range"});
  check_marker(d, d.goal, "goal", out);
  check_marker(d, d.fail, "fail", out);
  return out;
}

std::vector<Violation> violations(const Ctmc& m, double tol) {
  auto out = violations(m.chain, tol);
  const std::size_t n = m.size();
  if (static_cast<std::size_t>(m.E.size()) != n) {
    out.push_back({ErrorKind::InvalidState, 0, "exit rate vector has wrong size"});
    return out;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!(m.E(s) > 0.0) || !std::isfinite(m.E(s))) {
      std::ostringstream msg;
      msg << "state '" << m.chain.ids[s] << "' has exit rate " << m.E(s);
      out.push_back({ErrorKind::NonpositiveRate, s, msg.str()});
    }
  }
  if (m.rewards) {
    if (static_cast<std::size_t>(m.rewards->size()) != n) {
      out.push_back({ErrorKind::InvalidState, 0, "reward vector has wrong size"});
    } else {
      for (std::size_t s = 0; s < n; ++s) {
        if (!((*m.rewards)(s) >= 0.0)) {
          out.push_back({ErrorKind::InvalidArgument, s,
                         "state '" + m.chain.ids[s] + "' has a negative reward"});
        }
      }
    }
  }
  return out;
}

namespace {

template <class Model>
const Model& throw_on_violations(const Model& m, double tol) {
  auto v = violations(m, tol);
  if (v.empty()) return m;
  std::string msg;
  for (const auto& x : v) {
    if (!msg.empty()) msg += "; ";
    msg += x.detail;
  }
  throw Error(v.front().kind, msg);
}

}  // namespace

const Ctmc& validate(const Ctmc& m, double tol) { return throw_on_violations(m, tol); }
const Dtmc& validate(const Dtmc& d, double tol) { return throw_on_violations(d, tol); }

Matrix generator(const Ctmc& m) {
  const Eigen::Index n = static_cast<Eigen::Index>(m.size());
  Matrix Q = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      Q(i, j) = m.P()(i, j) * m.E(i);
      row += Q(i, j);
    }
    Q(i, i) = -row;
  }
  return Q;
}

Ctmc direct_sum(const Ctmc& m, const Ctmc& n) {
  const std::size_t a = m.size();
  const std::size_t b = n.size();
  Ctmc out;
  out.chain.ids = m.chain.ids;
  std::set<std::string> taken(m.chain.ids.begin(), m.chain.ids.end());
  for (const auto& id : n.chain.ids) {
    std::string fresh = id;
    while (taken.count(fresh)) fresh += "'";
    taken.insert(fresh);
    out.chain.ids.push_back(fresh);
  }
  out.chain.labels = m.chain.labels;
  out.chain.labels.insert(out.chain.labels.end(), n.chain.labels.begin(), n.chain.labels.end());
  out.chain.P = Matrix::Zero(a + b, a + b);
  out.chain.P.topLeftCorner(a, a) = m.P();
  out.chain.P.bottomRightCorner(b, b) = n.P();
  out.chain.initial = m.initial();
  out.chain.goal = m.goal();
  out.chain.fail = m.fail();
  out.E.resize(a + b);
  out.E << m.E, n.E;
  if (m.rewards && n.rewards) {
    out.rewards = Vector(a + b);
    *out.rewards << *m.rewards, *n.rewards;
  }
  if (!m.rate_text.empty() || !n.rate_text.empty()) {
    out.rate_text = m.rate_text;
    out.rate_text.resize(a);
    std::vector<std::string> tail = n.rate_text;
    tail.resize(b);
    out.rate_text.insert(out.rate_text.end(), tail.begin(), tail.end());
  }
  return out;
}

Ctmc scale(const Ctmc& m, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw Error(ErrorKind::NonpositiveScale, "scale factor must be positive");
  }
  Ctmc out = m;
  out.E = m.E * c;
  if (c != 1.0) out.rate_text.clear();
  return out;
}

std::vector<bool> reachable_from(const Matrix& P, std::size_t s) {
  const std::size_t n = static_cast<std::size_t>(P.rows());
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> todo{s};
  seen[s] = true;
  while (!todo.empty()) {
    std::size_t x = todo.front();
    todo.pop_front();
    for (std::size_t y = 0; y < n; ++y) {
      if (!seen[y] && P(x, y) > 0.0) {
        seen[y] = true;
        todo.push_back(y);
      }
    }
  }
  return seen;
}

namespace {

std::vector<bool> backward_closure(const Matrix& P, const std::vector<std::size_t>& targets) {
  const std::size_t n = static_cast<std::size_t>(P.rows());
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> todo;
  for (auto t : targets) {
    if (!seen[t]) {
      seen[t] = true;
      todo.push_back(t);
    }
  }
  while (!todo.empty()) {
    std::size_t y = todo.front();
    todo.pop_front();
    for (std::size_t x = 0; x < n; ++x) {
      if (!seen[x] && P(x, y) > 0.0) {
        seen[x] = true;
        todo.push_back(x);
      }
    }
  }
  return seen;
}

std::string fresh_id(const std::string& base, const std::set<std::string>& taken) {
  std::string id = base;
  while (taken.count(id)) id += "'";
  return id;
}

}  // namespace

std::vector<bool> can_reach(const Matrix& P, std::size_t target) {
  return backward_closure(P, {target});
}

Ctmc normalize_goal(const Ctmc& m, const std::vector<std::size_t>& goals) {
  if (goals.empty()) throw Error(ErrorKind::EmptyGoalSet, "goal set is empty");
  const std::size_t n = m.size();
  std::vector<bool> is_goal(n, false);
  for (auto g : goals) {
    if (g >= n) throw Error(ErrorKind::InvalidState, "goal index out of range");
    is_goal[g] = true;
  }
  std::vector<bool> alive = backward_closure(m.P(), goals);

  // New layout: every state keeps its relative position; merged goal and
  // fail states sit where their first member was.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> map(n, kNone);
  std::size_t next = 0, g_new = kNone, f_new = kNone;
  std::vector<std::size_t> goal_members, dead_members, origin;
  for (std::size_t s = 0; s < n; ++s) {
    if (is_goal[s]) {
      if (g_new == kNone) {
        g_new = next++;
        origin.push_back(s);
      }
      map[s] = g_new;
      goal_members.push_back(s);
    } else if (!alive[s]) {
      if (f_new == kNone) {
        f_new = next++;
        origin.push_back(s);
      }
      map[s] = f_new;
      dead_members.push_back(s);
    } else {
      map[s] = next++;
      origin.push_back(s);
    }
  }
  const std::size_t k = next;

  Ctmc out;
  out.chain.ids.resize(k);
  out.chain.labels.resize(k);
  out.chain.P = Matrix::Zero(k, k);
  out.E.resize(k);
  if (m.rewards) out.rewards = Vector(k);
  if (!m.rate_text.empty()) out.rate_text.resize(k);

  for (std::size_t i = 0; i < k; ++i) {
    std::size_t s = origin[i];
    out.chain.ids[i] = m.chain.ids[s];
    out.chain.labels[i] = m.chain.labels[s];
    out.E(i) = m.E(s);
    if (m.rewards) (*out.rewards)(i) = (*m.rewards)(s);
    if (!m.rate_text.empty()) out.rate_text[i] = m.rate_text[s];
    if (i == g_new || i == f_new) {
      out.chain.P(i, i) = 1.0;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) out.chain.P(i, map[j]) += m.P()(s, j);
  }

  std::set<std::string> taken;
  for (std::size_t i = 0; i < k; ++i) {
    if (i != g_new && i != f_new) taken.insert(out.chain.ids[i]);
  }
  auto finish_marker = [&](std::size_t idx, const std::vector<std::size_t>& members,
                           const std::string& word) {
    bool single = members.size() == 1 && is_absorbing(m.P(), members.front());
    if (!single) {
      out.chain.ids[idx] = fresh_id(members.size() == 1 ? m.chain.ids[members.front()] : word, taken);
      if (members.size() > 1) out.chain.labels[idx] = {word};
    }
    taken.insert(out.chain.ids[idx]);
    auto clashes = [&]() {
      for (std::size_t i = 0; i < k; ++i) {
        if (i != idx && out.chain.labels[i] == out.chain.labels[idx]) return true;
      }
      return false;
    };
    std::string extra = word;
    while (clashes()) {
      out.chain.labels[idx].insert(extra);
      extra += "'";
    }
  };
  if (g_new != kNone) finish_marker(g_new, goal_members, "goal");
  if (f_new != kNone) finish_marker(f_new, dead_members, "fail");

  out.chain.initial = map[m.initial()];
  out.chain.goal = g_new;
  if (f_new != kNone) out.chain.fail = f_new;
  return out;
}

Dtmc uniformize(const Ctmc& m, double q) {
  const double emax = max_rate(m);
  if (!(q >= emax * (1.0 - 1e-12))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "uniformization rate " << q << " is below the maximal exit rate " << emax;
    throw Error(ErrorKind::RateTooSmall, msg.str());
  }
  Dtmc d = m.chain;
  const std::size_t n = m.size();
  for (std::size_t s = 0; s < n; ++s) {
    if (m.E(s) == q) continue;
    const double f = m.E(s) / q;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != s) d.P(s, j) = m.P()(s, j) * f;
    }
    d.P(s, s) = 1.0 - f * (1.0 - m.P()(s, s));
  }
  return d;
}

Ctmc uniformize_ctmc(const Ctmc& m, double q) {
  Ctmc out;
  out.chain = uniformize(m, q);
  out.E = Vector::Constant(static_cast<Eigen::Index>(m.size()), q);
  out.rewards = m.rewards;
  return out;
}

Dtmc embedded_dtmc(const Ctmc& m) { return m.chain; }

double max_rate(const Ctmc& m) { return m.E.size() ? m.E.maxCoeff() : 0.0; }

std::optional<double> uniform_rate(const Ctmc& m) {
  if (m.E.size() == 0) return std::nullopt;
  const double lo = m.E.minCoeff();
  const double hi = m.E.maxCoeff();
  if (hi - lo > 1e-12 * hi) return std::nullopt;
  return hi;
}

Ctmc restrict_to_reachable(const Ctmc& m) {
  auto keep = reachable_from(m.P(), m.initial());
  std::vector<std::size_t> idx;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (keep[s]) idx.push_back(s);
  }
  if (idx.size() == m.size()) return m;
  const std::size_t k = idx.size();
  std::vector<std::size_t> map(m.size(), 0);
  for (std::size_t i = 0; i < k; ++i) map[idx[i]] = i;
  Ctmc out;
  out.chain.P = Matrix::Zero(k, k);
  out.E.resize(k);
  if (m.rewards) out.rewards = Vector(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t s = idx[i];
    out.chain.ids.push_back(m.chain.ids[s]);
    out.chain.labels.push_back(m.chain.labels[s]);
    if (!m.rate_text.empty()) out.rate_text.push_back(m.rate_text[s]);
    out.E(i) = m.E(s);
    if (m.rewards) (*out.rewards)(i) = (*m.rewards)(s);
    for (std::size_t j = 0; j < k; ++j) out.chain.P(i, j) = m.P()(s, idx[j]);
  }
  out.chain.initial = map[m.initial()];
  if (m.goal() && keep[*m.goal()]) out.chain.goal = map[*m.goal()];
  if (m.fail() && keep[*m.fail()]) out.chain.fail = map[*m.fail()];
  return out;
}

Ctmc with_initial(const Ctmc& m, std::size_t s) {
  if (s >= m.size()) throw Error(ErrorKind::InvalidState, "initial index out of range");
  Ctmc out = m;
  out.chain.initial = s;
  return out;
}

std::size_t CtmcBuilder::state(const std::string& id, LabelSet labels, double rate,
                               std::optional<double> reward) {
  if (index_.count(id)) throw Error(ErrorKind::InvalidState, "duplicate state id '" + id + "'");
  index_[id] = ids_.size();
  ids_.push_back(id);
  labels_.push_back(std::move(labels));
  rates_.push_back(rate);
  rewards_.push_back(reward);
  rate_text_.emplace_back();
  return ids_.size() - 1;
}

std::size_t CtmcBuilder::index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::InvalidState, "unknown state '" + id + "'");
  return it->second;
}

CtmcBuilder& CtmcBuilder::edge(const std::string& from, const std::string& to, double prob) {
  edges_.emplace_back(index(from), index(to), prob);
  return *this;
}

CtmcBuilder& CtmcBuilder::initial(const std::string& id) {
  initial_ = id;
  return *this;
}

CtmcBuilder& CtmcBuilder::goal(const std::string& id) {
  goal_ = id;
  return *this;
}

CtmcBuilder& CtmcBuilder::fail(const std::string& id) {
  fail_ = id;
  return *this;
}

CtmcBuilder& CtmcBuilder::rate_text(const std::string& id, const std::string& text) {
  rate_text_[index(id)] = text;
  return *this;
}

Ctmc CtmcBuilder::build_unchecked() const {
  const std::size_t n = ids_.size();
  Ctmc m;
  m.chain.ids = ids_;
  m.chain.labels = labels_;
  m.chain.P = Matrix::Zero(n, n);
  for (const auto& [a, b, p] : edges_) m.chain.P(a, b) += p;
  m.chain.initial = initial_.empty() ? 0 : index(initial_);
  if (!goal_.empty()) m.chain.goal = index(goal_);
  if (!fail_.empty()) m.chain.fail = index(fail_);
  m.E.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.E(i) = rates_[i];
  bool any_reward = std::any_of(rewards_.begin(), rewards_.end(), [](auto& r) { return r.has_value(); });
  if (any_reward) {
    m.rewards = Vector(n);
    for (std::size_t i = 0; i < n; ++i) (*m.rewards)(i) = rewards_[i].value_or(0.0);
  }
  bool any_text = std::any_of(rate_text_.begin(), rate_text_.end(), [](auto& t) { return !t.empty(); });
  if (any_text) m.rate_text = rate_text_;
  return m;
}

Ctmc CtmcBuilder::build() const {
  Ctmc m = build_unchecked();
  validate(m);
  return m;
}

}  // namespace epsbisim
