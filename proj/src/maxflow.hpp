#pragma once

// Dinic max-flow on real capacities.

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace rwre::detail {

class MaxFlow {
 public:
  explicit MaxFlow(std::size_t n) : adj_(n), level_(n), next_(n) {}

  void add_edge(std::size_t from, std::size_t to, double cap) {
    adj_[from].push_back(edges_.size());
    edges_.push_back({to, cap});
    adj_[to].push_back(edges_.size());
    edges_.push_back({from, 0.0});
  }

  double run(std::size_t source, std::size_t sink, double eps = 1e-15) {
    double total = 0.0;
    while (bfs(source, sink, eps)) {
      std::fill(next_.begin(), next_.end(), 0);
      while (true) {
        const double pushed = dfs(source, sink,
                                  std::numeric_limits<double>::infinity(), eps);
        if (pushed <= eps) break;
        total += pushed;
      }
    }
    return total;
  }

 private:
  struct Edge {
    std::size_t to;
    double cap;
  };

  bool bfs(std::size_t source, std::size_t sink, double eps) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[source] = 0;
    q.push(source);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto id : adj_[v]) {
        const auto& e = edges_[id];
        if (e.cap > eps && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[sink] >= 0;
  }

  double dfs(std::size_t v, std::size_t sink, double limit, double eps) {
    if (v == sink) return limit;
    for (auto& i = next_[v]; i < adj_[v].size(); ++i) {
      const auto id = adj_[v][i];
      auto& e = edges_[id];
      if (e.cap <= eps || level_[e.to] != level_[v] + 1) continue;
      const double got = dfs(e.to, sink, std::min(limit, e.cap), eps);
      if (got > eps) {
        e.cap -= got;
        edges_[id ^ 1].cap += got;
        return got;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace rwre::detail
