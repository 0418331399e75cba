#pragma once

// Minimum-cost transport between two discrete measures on the line, solved
// as a flow problem with successive shortest paths (Bellman-Ford on the
// residual graph). Independent of the CDF formula it is used to check.

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline double min_cost_transport(const std::vector<double>& p, const std::vector<double>& q,
                                 const std::vector<double>& coords) {
  const std::size_t n = p.size();
  // nodes: 0 source, 1..n supply, n+1..2n demand, 2n+1 sink
  const std::size_t N = 2 * n + 2, S = 0, T = 2 * n + 1;
  struct Edge {
    std::size_t to;
    double cap, cost;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> g(N);
  auto add = [&](std::size_t a, std::size_t b, double cap, double cost) {
    g[a].push_back({b, cap, cost, g[b].size()});
    g[b].push_back({a, 0.0, -cost, g[a].size() - 1});
  };
  for (std::size_t i = 0; i < n; ++i) add(S, 1 + i, p[i], 0.0);
  for (std::size_t j = 0; j < n; ++j) add(n + 1 + j, T, q[j], 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) add(1 + i, n + 1 + j, 2.0, std::abs(coords[i] - coords[j]));

  constexpr double eps = 1e-15;
  double cost = 0.0;
  for (;;) {
    std::vector<double> dist(N, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> pv(N, N), pe(N, 0);
    dist[S] = 0.0;
    for (std::size_t it = 0; it < N; ++it) {
      bool changed = false;
      for (std::size_t u = 0; u < N; ++u) {
        if (std::isinf(dist[u])) continue;
        for (std::size_t k = 0; k < g[u].size(); ++k) {
          const auto& e = g[u][k];
          if (e.cap > eps && dist[u] + e.cost < dist[e.to] - 1e-15) {
            dist[e.to] = dist[u] + e.cost;
            pv[e.to] = u;
            pe[e.to] = k;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (std::isinf(dist[T])) break;
    double f = std::numeric_limits<double>::infinity();
    for (std::size_t v = T; v != S; v = pv[v]) f = std::min(f, g[pv[v]][pe[v]].cap);
    if (f <= eps) break;
    for (std::size_t v = T; v != S; v = pv[v]) {
      auto& e = g[pv[v]][pe[v]];
      e.cap -= f;
      g[v][e.rev].cap += f;
    }
    cost += f * dist[T];
  }
  return cost;
}

}  // namespace oracle
