#pragma once

// Brute-force reference for closed networks, written independently of the
// library: its own traffic-equation solve (Gaussian elimination) and a literal
// walk over every vehicle placement.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Node {
  double visit = 0.0;
  double mu = 0.0;                // per-server rate
  std::optional<long long> servers;  // nullopt: one server per vehicle
};

// Stationary vector of an irreducible stochastic matrix, solving
// x (P - I) = 0 with the last equation replaced by sum x = 1.
inline std::vector<double> stationary(const std::vector<std::vector<double>>& P) {
  const std::size_t n = P.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a[r][c] = P[c][r] - (r == c ? 1.0 : 0.0);
  for (std::size_t c = 0; c < n; ++c) a[n - 1][c] = 1.0;
  a[n - 1][n] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    if (std::abs(a[c][c]) < 1e-300) throw std::runtime_error("singular traffic equations");
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = 0; r < n; ++r) x[r] = a[r][n] / a[r][r];
  return x;
}

// Stations first, then roads in (i, j) order with j != i. `servers` gives
// road server counts (nullopt means infinite-server roads).
inline std::vector<Node> mod_nodes(
    const std::vector<double>& lambda, const std::vector<std::vector<double>>& P,
    const std::vector<std::vector<double>>& T, const std::vector<double>& psi,
    const std::vector<std::vector<double>>& alpha,
    const std::vector<std::vector<long long>>* servers = nullptr) {
  const std::size_t n = lambda.size();
  std::vector<double> lt(n);
  std::vector<std::vector<double>> pt(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    lt[i] = lambda[i] + psi[i];
    for (std::size_t j = 0; j < n; ++j)
      pt[i][j] = (lambda[i] * P[i][j] + psi[i] * alpha[i][j]) / lt[i];
  }
  const std::vector<double> x = stationary(pt);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({x[i], lt[i], 1});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      Node road{x[i] * pt[i][j], 1.0 / T[i][j], std::nullopt};
      if (servers) road.servers = (*servers)[i][j];
      nodes.push_back(road);
    }
  return nodes;
}

struct Result {
  std::vector<double> G;                          // G(0..m)
  std::vector<std::vector<double>> availability;  // [m][station]
  std::vector<std::vector<double>> mean_length;   // [m][node]
};

// Enumerates every placement of up to m vehicles and sums product-form
// weights prod_k visit_k^n_k / prod_{l=1..n_k} mu_k min(l, s_k).
inline Result brute_force(const std::vector<Node>& nodes, std::size_t stations, long long m) {
  const std::size_t K = nodes.size();
  std::vector<std::vector<double>> factor(K, std::vector<double>(m + 1, 1.0));
  for (std::size_t k = 0; k < K; ++k)
    for (long long x = 1; x <= m; ++x) {
      const double busy = nodes[k].servers
                              ? static_cast<double>(std::min<long long>(x, *nodes[k].servers))
                              : static_cast<double>(x);
      factor[k][x] = factor[k][x - 1] * nodes[k].visit / (nodes[k].mu * busy);
    }
  Result r;
  r.G.assign(m + 1, 0.0);
  std::vector<std::vector<double>> busy_w(m + 1, std::vector<double>(stations, 0.0));
  std::vector<std::vector<double>> len_w(m + 1, std::vector<double>(K, 0.0));
  std::vector<long long> state(K, 0);
  std::function<void(std::size_t, long long, double)> walk = [&](std::size_t k, long long used,
                                                                 double w) {
    if (k == K) {
      r.G[used] += w;
      for (std::size_t i = 0; i < stations; ++i)
        if (state[i] > 0) busy_w[used][i] += w;
      for (std::size_t q = 0; q < K; ++q) len_w[used][q] += w * static_cast<double>(state[q]);
      return;
    }
    for (long long x = 0; used + x <= m; ++x) {
      state[k] = x;
      walk(k + 1, used + x, w * factor[k][x]);
    }
    state[k] = 0;
  };
  walk(0, 0, 1.0);
  r.availability.assign(m + 1, std::vector<double>(stations, 0.0));
  r.mean_length.assign(m + 1, std::vector<double>(K, 0.0));
  for (long long v = 0; v <= m; ++v) {
    for (std::size_t i = 0; i < stations; ++i) r.availability[v][i] = busy_w[v][i] / r.G[v];
    for (std::size_t q = 0; q < K; ++q) r.mean_length[v][q] = len_w[v][q] / r.G[v];
  }
  return r;
}

}  // namespace oracle
