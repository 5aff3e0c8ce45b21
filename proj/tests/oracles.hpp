#pragma once

// Independent reference computations used only by the tests.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Tridiagonal reflection matrix with the given diagonal and -1 off-diagonals.
inline std::vector<std::vector<double>> reflection_matrix(const std::vector<double>& diag) {
  const std::size_t n = diag.size();
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    r[i][i] = diag[i];
    if (i > 0) r[i][i - 1] = -1.0;
    if (i + 1 < n) r[i][i + 1] = -1.0;
  }
  return r;
}

/// LCP w = q + R x, x >= 0, w >= 0, x.w = 0 by enumerating every active set.
/// Returns the first complementary solution found (it is unique for
/// P-matrices).
inline std::optional<std::vector<double>> lcp_enumerate(const std::vector<double>& q,
                                                        const std::vector<double>& diag, double tol = 1e-12) {
  const std::size_t n = q.size();
  const auto r = reflection_matrix(diag);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> act;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) act.push_back(i);
    std::vector<double> x(n, 0.0);
    if (!act.empty()) {
      std::vector<std::vector<double>> a(act.size(), std::vector<double>(act.size()));
      std::vector<double> b(act.size());
      for (std::size_t i = 0; i < act.size(); ++i) {
        b[i] = -q[act[i]];
        for (std::size_t k = 0; k < act.size(); ++k) a[i][k] = r[act[i]][act[k]];
      }
      const auto xs = solve_dense(a, b);
      for (std::size_t i = 0; i < act.size(); ++i) x[act[i]] = xs[i];
    }
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      double w = q[i];
      for (std::size_t k = 0; k < n; ++k) w += r[i][k] * x[k];
      ok = x[i] >= -tol && w >= -tol;
    }
    if (ok) return x;
  }
  return std::nullopt;
}

/// Exp(rate) restricted to [lo, hi] by accept/reject from an independent engine.
inline std::vector<double> rejection_truncated_exp(double rate, double lo, double hi, std::size_t n,
                                                   std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::exponential_distribution<double> exp(rate);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double x = exp(eng);
    if (x >= lo && x <= hi) out.push_back(x);
  }
  return out;
}

/// Two-sample Kolmogorov-Smirnov distance.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Standard normal tail by adaptive Gauss-Kronrod quadrature of the density.
inline double normal_tail_quadrature(double a) {
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  using boost::math::quadrature::gauss_kronrod;
  if (a >= 0.0) {
    return gauss_kronrod<double, 61>::integrate(phi, a, a + 40.0, 15, 1e-15);
  }
  return 1.0 - gauss_kronrod<double, 61>::integrate(phi, -a, -a + 40.0, 15, 1e-15);
}

/// KL(Exp(l) | Exp(a)) = int f log(f/g) by quadrature on [0, inf).
inline double kl_exp_quadrature(double l, double a) {
  auto integrand = [&](double x) {
    const double f = l * std::exp(-l * x);
    return f * (std::log(l / a) - (l - a) * x);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
}

/// Box integral of a density over [lo, hi] by nested Gauss-Kronrod (2-D).
inline double box_mass_2d(const std::function<double(double, double)>& density, double lo0, double hi0, double lo1,
                          double hi1) {
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [&](double x) {
    return gauss_kronrod<double, 31>::integrate([&](double y) { return density(x, y); }, lo1, hi1, 10, 1e-13);
  };
  return gauss_kronrod<double, 31>::integrate(inner, lo0, hi0, 10, 1e-13);
}

}  // namespace oracle
