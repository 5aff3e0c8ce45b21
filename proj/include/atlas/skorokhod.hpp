#pragma once

// Discrete Skorokhod problem for the tridiagonal reflection matrix of the
// spacing process:
//
//   w = q + R dL,  dL >= 0,  w >= 0,  w_j dL_j = 0,
//
// with R_jj = diag_j (2 in the interior, 1 at a mixed boundary node) and
// R_{j,j+1} = R_{j+1,j} = -1. R is a symmetric M-matrix, so projected
// Gauss-Seidel converges monotonically from dL = 0, and the active-set
// iteration that only ever adds indices (Chandrasekaran) terminates with the
// exact solution after at most n block solves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "atlas/error.hpp"

namespace atlas {

enum class SkorokhodMethod {
  active_set,    // exact: grow the active set, solve each contiguous block
  gauss_seidel,  // projected coordinate sweeps to tolerance
};

struct SkorokhodOptions {
  SkorokhodMethod method = SkorokhodMethod::active_set;
  double tol = 1e-12;
  long max_sweeps = 10000;
};

/// Reusable scratch storage for the reflection solvers.
struct SkorokhodWorkspace {
  void resize(std::size_t n) {
    if (flag.size() != n) {
      flag.assign(n, 0);
      ring.assign(n, 0);
      cprime.assign(n, 0.0);
    }
  }

  /// Coordinates whose increment may be positive after the last solve.
  std::vector<std::size_t> support;
  std::vector<char> flag;
  std::vector<std::size_t> ring, added;
  std::vector<double> cprime;
};

namespace detail {

template <class Q>
double skorokhod_residual(Q& q, std::span<const double> diag, std::span<const double> dL) {
  const std::size_t n = diag.size();
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = i > 0 ? dL[i - 1] : 0.0;
    const double r = i + 1 < n ? dL[i + 1] : 0.0;
    residual = std::max(residual, std::abs(std::max(0.0, (l + r - q(i)) / diag[i]) - dL[i]));
  }
  return residual;
}

// ws.support holds the seeds on entry and the final active set on return.
template <class Q>
long active_set_solve(Q& q, std::span<const double> diag, std::span<double> dL, SkorokhodWorkspace& ws,
                       const SkorokhodOptions&) {
  const std::size_t n = diag.size();
  auto& in = ws.flag;
  auto& act = ws.support;
  if (!std::is_sorted(act.begin(), act.end())) std::sort(act.begin(), act.end());
  // 2 marks an index whose run has not been solved since it joined.
  for (std::size_t j : act) in[j] = 2;
  auto check = [&](std::size_t j) {
    if (in[j]) return;
    const double l = j > 0 ? dL[j - 1] : 0.0;
    const double r = j + 1 < n ? dL[j + 1] : 0.0;
    if (q(j) - l - r < 0.0) {
      in[j] = 2;
      ws.added.push_back(j);
    }
  };
  long iterations = 0;
  for (;;) {
    if (++iterations > static_cast<long>(n) + 1) {
      for (std::size_t j : act) in[j] = 0;
      throw NumericalFailure("active-set reflection did not terminate", skorokhod_residual(q, diag, dL));
    }
    ws.added.clear();
    // Thomas elimination on each maximal run of consecutive active indices
    // that gained members; inactive neighbours have dL = 0.
    for (std::size_t b = 0; b < act.size();) {
      std::size_t e = b;
      bool fresh = in[act[b]] == 2;
      while (e + 1 < act.size() && act[e + 1] == act[e] + 1) fresh |= in[act[++e]] == 2;
      if (fresh) {
        double prev_c = 0.0, prev_d = 0.0;
        for (std::size_t k = b; k <= e; ++k) {
          const std::size_t j = act[k];
          in[j] = 1;
          const double denom = diag[j] + prev_c;
          prev_c = -1.0 / denom;
          prev_d = (prev_d - q(j)) / denom;
          ws.cprime[j] = prev_c;
          dL[j] = prev_d;
        }
        for (std::size_t k = e; k-- > b;) dL[act[k]] -= ws.cprime[act[k]] * dL[act[k + 1]];
        if (act[b] > 0) check(act[b] - 1);
        if (act[e] + 1 < n) check(act[e] + 1);
      }
      b = e + 1;
    }
    if (ws.added.empty()) break;
    const auto mid = act.insert(act.end(), ws.added.begin(), ws.added.end());
    std::inplace_merge(act.begin(), mid, act.end());
  }
  for (std::size_t j : act) {
    in[j] = 0;
    if (dL[j] < 0.0) dL[j] = 0.0;  // rounding only; the exact solution is non-negative
  }
  return iterations;
}

// Worklist form of projected Gauss-Seidel: a coordinate is revisited only
// when one of its neighbours changed.
template <class Q>
long gauss_seidel_solve(Q& q, std::span<const double> diag, std::span<double> dL, SkorokhodWorkspace& ws,
                         const SkorokhodOptions& opt) {
  const std::size_t n = diag.size();
  std::size_t head = 0, count = 0;
  auto push = [&](std::size_t j) {
    if (ws.flag[j]) return;
    ws.flag[j] = 1;
    ws.ring[(head + count) % n] = j;
    ++count;
  };
  ws.added.assign(ws.support.begin(), ws.support.end());
  ws.support.clear();
  for (std::size_t j : ws.added) push(j);

  const long budget = opt.max_sweeps * static_cast<long>(n);
  long updates = 0;
  while (count > 0) {
    const std::size_t j = ws.ring[head];
    head = (head + 1) % n;
    --count;
    ws.flag[j] = 0;

    const double left = j > 0 ? dL[j - 1] : 0.0;
    const double right = j + 1 < n ? dL[j + 1] : 0.0;
    const double next = std::max(0.0, (left + right - q(j)) / diag[j]);
    if (std::abs(next - dL[j]) <= opt.tol) continue;
    if (dL[j] == 0.0) ws.support.push_back(j);
    dL[j] = next;
    if (++updates > budget) {
      for (std::size_t i = 0; i < n; ++i) ws.flag[i] = 0;
      throw NumericalFailure("Skorokhod sweep did not converge", skorokhod_residual(q, diag, dL));
    }
    if (j > 0) push(j - 1);
    if (j + 1 < n) push(j + 1);
  }
  return updates;
}

}  // namespace detail

/// Solves the reflection problem touching only the coordinates near the
/// seeds. `q(j)` returns the free value of coordinate j (it may be computed
/// lazily); `seeds` lists the coordinates with q_j < 0. On return dL holds the
/// pushing increments and ws.support the indices where it may be positive.
/// dL must be all zero outside the support of the previous solve with the
/// same workspace. Returns the number of block solves or coordinate updates.
template <class Q>
long solve_skorokhod(Q&& q, std::span<const double> diag, std::span<const std::size_t> seeds,
                     std::span<double> dL, SkorokhodWorkspace& ws, const SkorokhodOptions& opt) {
  const std::size_t n = diag.size();
  ws.resize(n);
  for (std::size_t j : ws.support) dL[j] = 0.0;
  ws.support.assign(seeds.begin(), seeds.end());
  if (seeds.empty()) return 0;
  if (opt.method == SkorokhodMethod::gauss_seidel) return detail::gauss_seidel_solve(q, diag, dL, ws, opt);
  return detail::active_set_solve(q, diag, dL, ws, opt);
}

/// w = q + R dL for the tridiagonal reflection matrix.
inline double reflected_value(double q_j, std::span<const double> diag, std::span<const double> dL,
                              std::size_t j) {
  const std::size_t n = diag.size();
  const double left = j > 0 ? dL[j - 1] : 0.0;
  const double right = j + 1 < n ? dL[j + 1] : 0.0;
  return q_j + diag[j] * dL[j] - left - right;
}

/// Diagonal of the reflection matrix: 2 everywhere, except a right-anchored
/// system whose last node has the mixed (Neumann) coefficient 1.
inline std::vector<double> reflection_diagonal(std::size_t gaps, bool right_anchored) {
  std::vector<double> d(gaps, 2.0);
  if (right_anchored && gaps > 0) d.back() = 1.0;
  return d;
}

}  // namespace atlas
