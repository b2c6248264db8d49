#include "epsbisim/maxflow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace epsbisim {

namespace {
constexpr double kResidualFloor = 1e-15;
}

FlowNetwork::FlowNetwork(std::size_t nodes) : adj_(nodes) {}

std::size_t FlowNetwork::add_edge(std::size_t from, std::size_t to, double capacity) {
  adj_[from].push_back({to, adj_[to].size(), capacity, 0.0});
  adj_[to].push_back({from, adj_[from].size() - 1, 0.0, 0.0});
  handles_.emplace_back(from, adj_[from].size() - 1);
  return handles_.size() - 1;
}

double FlowNetwork::flow(std::size_t edge_id) const {
  const auto& [u, i] = handles_[edge_id];
  return adj_[u][i].flow;
}

double FlowNetwork::max_flow(std::size_t source, std::size_t sink) {
  const std::size_t n = adj_.size();
  double total = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> parent(n);
  for (;;) {
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> todo{source};
    seen[source] = true;
    while (!todo.empty() && !seen[sink]) {
      std::size_t u = todo.front();
      todo.pop_front();
      for (std::size_t i = 0; i < adj_[u].size(); ++i) {
        const Arc& a = adj_[u][i];
        if (!seen[a.to] && a.cap - a.flow > kResidualFloor) {
          seen[a.to] = true;
          parent[a.to] = {u, i};
          todo.push_back(a.to);
        }
      }
    }
    if (!seen[sink]) break;
    double push = std::numeric_limits<double>::infinity();
    for (std::size_t v = sink; v != source; v = parent[v].first) {
      const Arc& a = adj_[parent[v].first][parent[v].second];
      push = std::min(push, a.cap - a.flow);
    }
    for (std::size_t v = sink; v != source; v = parent[v].first) {
      Arc& a = adj_[parent[v].first][parent[v].second];
      a.flow += push;
      adj_[a.to][a.rev].flow -= push;
    }
    total += push;
  }
  return total;
}

}  // namespace epsbisim
