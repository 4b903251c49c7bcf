#pragma once

// Minimum-cost flow by enumerating basic solutions. An uncapacitated
// transshipment problem attains its optimum on a spanning tree of arcs, so
// trying every tree and keeping the cheapest feasible one is exact. Only
// usable for a handful of nodes.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

struct BasisResult {
  double cost = std::numeric_limits<double>::infinity();
  std::size_t trees = 0;
  std::size_t feasible = 0;
};

// costs[i][j] < inf marks an arc. supply[i] is the net outflow.
inline BasisResult basis_min_cost(const std::vector<std::vector<double>>& costs,
                                  const std::vector<double>& supply) {
  const std::size_t n = supply.size();
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && std::isfinite(costs[i][j])) arcs.emplace_back(i, j);

  BasisResult best;
  std::vector<std::size_t> pick;
  const auto try_tree = [&]() {
    // Union-find to reject cycles (antiparallel arcs count as one).
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t a : pick) {
      const std::size_t u = find(arcs[a].first), v = find(arcs[a].second);
      if (u == v) return;
      parent[u] = v;
    }
    ++best.trees;
    // Peel leaves: a leaf's arc carries exactly its remaining imbalance.
    std::vector<double> rest = supply;
    std::vector<bool> used(pick.size(), false);
    double cost = 0.0;
    for (std::size_t round = 0; round < pick.size(); ++round) {
      std::vector<int> degree(n, 0);
      for (std::size_t e = 0; e < pick.size(); ++e)
        if (!used[e]) {
          ++degree[arcs[pick[e]].first];
          ++degree[arcs[pick[e]].second];
        }
      for (std::size_t e = 0; e < pick.size(); ++e) {
        if (used[e]) continue;
        const auto [u, v] = arcs[pick[e]];
        double flow;
        if (degree[u] == 1) {
          flow = rest[u];
          rest[v] += flow;
          rest[u] = 0.0;
        } else if (degree[v] == 1) {
          flow = -rest[v];
          rest[u] -= flow;
          rest[v] = 0.0;
        } else {
          continue;
        }
        if (flow < -1e-9) return;
        cost += flow * costs[u][v];
        used[e] = true;
        break;
      }
    }
    for (double r : rest)
      if (std::abs(r) > 1e-9) return;
    ++best.feasible;
    if (cost < best.cost) best.cost = cost;
  };

  const std::size_t k = n - 1;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (arcs.size() < k) return best;
  while (true) {
    pick = idx;
    try_tree();
    std::size_t p = k;
    while (p > 0 && idx[p - 1] == arcs.size() - k + p - 1) --p;
    if (p == 0) break;
    ++idx[p - 1];
    for (std::size_t q = p; q < k; ++q) idx[q] = idx[q - 1] + 1;
  }
  return best;
}

}  // namespace oracle
