#pragma once

#include <string>
#include <vector>

#include "epsbisim/bisim.hpp"
#include "epsbisim/model.hpp"

namespace epsbisim {

inline const std::vector<double> kOrderingGrid = {0.5, 1.0, 2.0, 5.0};

struct PairUniformization {
  Ctmc m_prime;
  Ctmc n_prime;
  double q_m = 0.0;
  double q_n = 0.0;  // q_m * e^delta
  BisimCheck recheck;  // the relation on m_prime + n_prime at (0, delta)
  bool ordering_checked = false;
  bool ordering_holds = false;
  std::vector<std::string> warnings;
};

// `r` is a transitive (0, delta)-bisimulation on direct_sum(m, n). Rates are
// flattened per class (the slowest M rate, times e^delta on the N side) and
// both chains are uniformized, M at the largest flattened rate and N at that
// rate times e^delta.
PairUniformization uniformize_pair(const Ctmc& m, const Ctmc& n, const PairRelation& r, double delta,
                                   const std::vector<double>& grid = kOrderingGrid);

}  // namespace epsbisim
