#include "epsbisim/bisim.hpp"

namespace epsbisim {

namespace {

std::string pair_id(const Ctmc& m, const Ctmc& n, std::size_t s, std::size_t t) {
  return "(" + m.chain.ids[s] + "," + n.chain.ids[t] + ")";
}

}  // namespace

SplitResult split_construction(const Ctmc& m, const Ctmc& n, double eps, double delta) {
  const std::size_t nm = m.size();
  const std::size_t nn = n.size();
  const Ctmc sum = direct_sum(m, n);
  SplitResult out;
  out.joint = epsilon_delta_bisim(sum, eps, delta);
  if (!out.joint.related(m.initial(), nm + n.initial())) {
    throw Error(ErrorKind::NotBisimilar, "initial states are not (eps, delta)-bisimilar");
  }

  const std::size_t np = nm * nn;
  Matrix P = Matrix::Zero(np, np);
  Vector em(np), en(np);
  std::vector<LabelSet> labels(np);
  std::vector<std::string> ids(np);
  for (std::size_t s = 0; s < nm; ++s) {
    for (std::size_t t = 0; t < nn; ++t) {
      const std::size_t p = s * nn + t;
      ids[p] = pair_id(m, n, s, t);
      labels[p] = n.chain.labels[t];
      en(p) = n.E(t);
      if (out.joint.related(s, nm + t)) {
        em(p) = m.E(s);
        const Coupling c = extract_coupling(sum.chain, out.joint, s, nm + t, eps);
        for (std::size_t i = 0; i < c.succ_source.size(); ++i) {
          const std::size_t s2 = c.succ_source[i];
          for (std::size_t j = 0; j < c.succ_target.size(); ++j) {
            const std::size_t t2 = c.succ_target[j] - nm;
            P(p, s2 * nn + t2) += m.P()(s, s2) * c.weights(i, j);
          }
        }
      } else {
        em(p) = n.E(t);
        for (std::size_t s2 = 0; s2 < nm; ++s2) {
          for (std::size_t t2 = 0; t2 < nn; ++t2) P(p, s2 * nn + t2) = m.P()(s, s2) * n.P()(t, t2);
        }
      }
    }
  }

  Ctmc base;
  base.chain.ids = ids;
  base.chain.labels = labels;
  base.chain.P = P;
  base.chain.initial = m.initial() * nn + n.initial();
  out.m_prime = base;
  out.m_prime.E = em;
  out.n_prime = base;
  out.n_prime.E = en;

  Ctmc m_plain = m;
  m_plain.rewards.reset();
  m_plain.chain.goal.reset();
  m_plain.chain.fail.reset();
  Ctmc n_plain = n;
  n_plain.rewards.reset();
  n_plain.chain.goal.reset();
  n_plain.chain.fail.reset();

  {
    const Ctmc left = direct_sum(m_plain, out.m_prime);
    PairRelation r(left.size(), eps, 0.0);
    for (std::size_t s = 0; s < nm; ++s) {
      for (std::size_t t = 0; t < nn; ++t) {
        if (out.joint.related(s, nm + t)) r.relate(s, nm + s * nn + t);
      }
    }
    out.m_to_m_prime = is_bisimulation(left, r);
  }
  {
    const Ctmc mid = direct_sum(out.m_prime, out.n_prime);
    PairRelation r(mid.size(), 0.0, delta);
    for (std::size_t p = 0; p < np; ++p) r.relate(p, np + p);
    out.m_prime_to_n_prime = is_bisimulation(mid, r);
  }
  {
    const Ctmc right = direct_sum(out.n_prime, n_plain);
    Partition classes;
    for (std::size_t t = 0; t < nn; ++t) {
      std::vector<std::size_t> block;
      for (std::size_t s = 0; s < nm; ++s) block.push_back(s * nn + t);
      block.push_back(np + t);
      classes.blocks.push_back(std::move(block));
    }
    out.n_prime_to_n = is_bisimulation(right, relation_of(classes, right.size()));
  }
  return out;
}

}  // namespace epsbisim
