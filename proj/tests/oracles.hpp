#pragma once

// Independent reference solvers used only by the test suite.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Dense two-phase tableau simplex with Bland's rule:
/// min c.x subject to A x = b, x >= 0, b >= 0. Returns +inf if infeasible.
inline double dense_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                       const std::vector<double>& c, std::vector<double>* x_out = nullptr) {
  using R = long double;
  const std::size_t m = A.size(), n = c.size();
  const std::size_t cols = n + m + 1;  // variables, artificials, rhs
  std::vector<std::vector<R>> T(m + 1, std::vector<R>(cols, 0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1;
    T[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  const R eps = 1e-14L;

  auto pivot = [&](std::size_t r, std::size_t col) {
    const R pv = T[r][col];
    for (auto& v : T[r]) v /= pv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r || T[i][col] == 0) continue;
      const R f = T[i][col];
      for (std::size_t j = 0; j < cols; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = col;
  };

  auto optimize = [&](std::size_t allowed) {
    for (;;) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < allowed; ++j)
        if (T[m][j] < -eps) {
          enter = j;
          break;
        }
      if (enter == cols) return;
      std::size_t leave = m;
      R best = std::numeric_limits<R>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (T[i][enter] > eps) {
          const R ratio = T[i][cols - 1] / T[i][enter];
          if (ratio < best - eps || (std::abs(ratio - best) <= eps && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) return;  // unbounded; cannot happen for transport LPs
      pivot(leave, enter);
    }
  };

  // Phase I objective: sum of artificials expressed in nonbasic terms.
  for (std::size_t j = 0; j < cols; ++j) T[m][j] = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (j < n || j == cols - 1) T[m][j] -= T[i][j];
  optimize(n + m);
  if (-T[m][cols - 1] > 1e-9L) return std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(T[i][j]) > eps) {
        pivot(i, j);
        break;
      }
  }
  // Phase II.
  for (std::size_t j = 0; j < cols; ++j) T[m][j] = j < n ? static_cast<R>(c[j]) : 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bj = basis[i];
    if (bj < n && T[m][bj] != 0) {
      const R f = T[m][bj];
      for (std::size_t j = 0; j < cols; ++j) T[m][j] -= f * T[i][j];
    }
  }
  optimize(n);
  if (x_out) {
    x_out->assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) (*x_out)[basis[i]] = static_cast<double>(T[i][cols - 1]);
  }
  return static_cast<double>(-T[m][cols - 1]);
}

/// Transport LP for marginals a, b and cost(i, j) through dense_lp.
inline double transport_lp(const std::vector<double>& a, const std::vector<double>& b,
                           const std::function<double(std::size_t, std::size_t)>& cost) {
  const std::size_t n1 = a.size(), n2 = b.size();
  std::vector<std::vector<double>> A(n1 + n2, std::vector<double>(n1 * n2, 0.0));
  std::vector<double> rhs(n1 + n2), c(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      A[i][i * n2 + j] = 1;
      A[n1 + j][i * n2 + j] = 1;
      c[i * n2 + j] = cost(i, j);
    }
  for (std::size_t i = 0; i < n1; ++i) rhs[i] = a[i];
  for (std::size_t j = 0; j < n2; ++j) rhs[n1 + j] = b[j];
  return dense_lp(A, rhs, c);
}

/// Minimum over all vertices of the transport polytope, found by trying
/// every choice of n1+n2-1 basic cells and solving the square system.
inline double transport_vertices(const std::vector<double>& a, const std::vector<double>& b,
                                 const std::function<double(std::size_t, std::size_t)>& cost) {
  const std::size_t n1 = a.size(), n2 = b.size(), nv = n1 * n2, r = n1 + n2 - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(r);
  for (std::size_t k = 0; k < r; ++k) pick[k] = k;
  for (;;) {
    // Gaussian elimination on the r x r system (last column constraint dropped).
    std::vector<std::vector<long double>> M(r, std::vector<long double>(r + 1, 0));
    for (std::size_t row = 0; row < r; ++row) {
      for (std::size_t k = 0; k < r; ++k) {
        const std::size_t i = pick[k] / n2, j = pick[k] % n2;
        M[row][k] = row < n1 ? (i == row ? 1 : 0) : (j == row - n1 ? 1 : 0);
      }
      M[row][r] = row < n1 ? a[row] : b[row - n1];
    }
    bool singular = false;
    for (std::size_t col = 0; col < r && !singular; ++col) {
      std::size_t p = col;
      for (std::size_t row = col; row < r; ++row)
        if (std::abs(M[row][col]) > std::abs(M[p][col])) p = row;
      if (std::abs(M[p][col]) < 1e-12L) {
        singular = true;
        break;
      }
      std::swap(M[p], M[col]);
      for (std::size_t row = 0; row < r; ++row) {
        if (row == col) continue;
        const long double f = M[row][col] / M[col][col];
        for (std::size_t k = col; k <= r; ++k) M[row][k] -= f * M[col][k];
      }
    }
    if (!singular) {
      bool feasible = true;
      double value = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        const double x = static_cast<double>(M[k][r] / M[k][k]);
        if (x < -1e-12) feasible = false;
        value += x * cost(pick[k] / n2, pick[k] % n2);
      }
      if (feasible) best = std::min(best, value);
    }
    // next combination
    std::size_t k = r;
    while (k > 0 && pick[k - 1] == nv - r + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t q = k; q < r; ++q) pick[q] = pick[q - 1] + 1;
  }
  return best;
}

/// Brute-force c-transform: min_i cost(i, j) - phi_i.
inline std::vector<double> brute_transform(const std::vector<double>& phi, std::size_t ny,
                                           const std::function<double(std::size_t, std::size_t)>& cost) {
  std::vector<double> out(ny, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < phi.size(); ++i) out[j] = std::min(out[j], cost(i, j) - phi[i]);
  return out;
}

/// Shortest paths by Dijkstra on a dense adjacency (inf = no edge).
inline std::vector<double> dijkstra(const std::vector<std::vector<double>>& w, std::size_t src) {
  const std::size_t n = w.size();
  std::vector<double> d(n, std::numeric_limits<double>::infinity());
  std::vector<char> done(n, 0);
  d[src] = 0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!done[v] && (u == n || d[v] < d[u])) u = v;
    if (u == n || d[u] == std::numeric_limits<double>::infinity()) break;
    done[u] = 1;
    for (std::size_t v = 0; v < n; ++v)
      if (w[u][v] < std::numeric_limits<double>::infinity()) d[v] = std::min(d[v], d[u] + w[u][v]);
  }
  return d;
}

}  // namespace oracle
