#pragma once

#include <cstddef>
#include <vector>

namespace epsbisim {

// Edmonds-Karp on a small network with real capacities.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes);

  // Returns an id usable with flow().
  std::size_t add_edge(std::size_t from, std::size_t to, double capacity);
  double max_flow(std::size_t source, std::size_t sink);
  double flow(std::size_t edge_id) const;

 private:
  struct Arc {
    std::size_t to;
    std::size_t rev;
    double cap;
    double flow;
  };
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::pair<std::size_t, std::size_t>> handles_;
};

}  // namespace epsbisim
