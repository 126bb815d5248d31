#pragma once

// Reference computations for the tests. Everything here is dense and naive on
// purpose and shares no code path with the library solvers.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "heatlab/graph.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix transition_matrix(const heatlab::WeightedGraph& g, double lazy) {
  const std::size_t n = g.n();
  Matrix P(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) P[x][x] = lazy;
  for (const auto& e : g.edges()) {
    P[e.u][e.v] += (1 - lazy) * e.w / g.mu(e.u);
    P[e.v][e.u] += (1 - lazy) * e.w / g.mu(e.v);
  }
  return P;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size(), m = b[0].size(), k = b.size();
  Matrix c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      if (a[i][l] != 0.0)
        for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

inline Matrix power(const Matrix& P, int t) {
  const std::size_t n = P.size();
  Matrix r(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = 1.0;
  for (int s = 0; s < t; ++s) r = multiply(r, P);
  return r;
}

/// Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix A, std::vector<double> b) {
  const std::size_t n = A.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    if (std::abs(A[p][c]) < 1e-300) throw std::runtime_error("singular");
    std::swap(A[p], A[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

/// E_y(T_D) for y in domain (aligned with domain), from (I - P_D) u = 1.
inline std::vector<double> mean_exit(const heatlab::WeightedGraph& g, double lazy,
                                     const std::vector<heatlab::Vertex>& domain) {
  const Matrix P = transition_matrix(g, lazy);
  const std::size_t m = domain.size();
  Matrix A(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) A[i][j] = (i == j ? 1.0 : 0.0) - P[domain[i]][domain[j]];
  return solve(A, std::vector<double>(m, 1.0));
}

/// P_x(walk is outside D at some step in 1..t) by brute-force dynamic
/// programming over the dense matrix.
inline std::vector<double> exit_cdf(const heatlab::WeightedGraph& g, double lazy,
                                    const std::vector<heatlab::Vertex>& domain, heatlab::Vertex x, int t_max) {
  const Matrix P = transition_matrix(g, lazy);
  std::vector<char> in(g.n(), 0);
  for (auto v : domain) in[v] = 1;
  std::vector<double> alive(g.n(), 0.0);
  alive[x] = 1.0;
  std::vector<double> cdf{0.0};
  double dead = 0.0;
  for (int t = 1; t <= t_max; ++t) {
    std::vector<double> next(g.n(), 0.0);
    for (std::size_t a = 0; a < g.n(); ++a)
      if (alive[a] != 0.0)
        for (std::size_t b = 0; b < g.n(); ++b) {
          const double m = alive[a] * P[a][b];
          if (in[b])
            next[b] += m;
          else
            dead += m;
        }
    alive = next;
    cdf.push_back(dead);
  }
  return cdf;
}

/// P_x(walk visits A at some step in 0..k) for k = 0..t_max, by dense DP.
inline std::vector<double> hitting_cdf(const heatlab::WeightedGraph& g, double lazy,
                                       const std::vector<heatlab::Vertex>& A, heatlab::Vertex x, int t_max) {
  const Matrix P = transition_matrix(g, lazy);
  std::vector<char> in(g.n(), 0);
  for (auto v : A) in[v] = 1;
  std::vector<double> alive(g.n(), 0.0);
  double hit = in[x] ? 1.0 : 0.0;
  if (!in[x]) alive[x] = 1.0;
  std::vector<double> cdf{hit};
  for (int t = 1; t <= t_max; ++t) {
    std::vector<double> next(g.n(), 0.0);
    for (std::size_t a = 0; a < g.n(); ++a)
      if (alive[a] != 0.0)
        for (std::size_t b = 0; b < g.n(); ++b) {
          const double m = alive[a] * P[a][b];
          if (in[b])
            hit += m;
          else
            next[b] += m;
        }
    alive = next;
    cdf.push_back(hit);
  }
  return cdf;
}

/// Gambler's ruin for the simple walk on {0..N}: P_k(hit N before 0).
inline double ruin_up(int k, int N) { return static_cast<double>(k) / N; }

}  // namespace oracle
