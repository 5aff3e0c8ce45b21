#pragma once

// Statistical checks: Kolmogorov-Smirnov against exponential laws,
// coupling-order diagnostics, log-log exponent fits, and the finite
// coefficient identities behind the generators of the spacing process.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "atlas/engine.hpp"
#include "atlas/error.hpp"
#include "atlas/measures.hpp"

namespace atlas {

/// Asymptotic Kolmogorov critical constant c(alpha) = sqrt(-log(alpha/2)/2).
inline double kolmogorov_critical(double significance) {
  detail::require(significance > 0.0 && significance < 1.0, Errc::invalid_input, "significance must be in (0,1)");
  return std::sqrt(-0.5 * std::log(significance / 2.0));
}

struct KsResult {
  double statistic = 0.0;
  std::size_t n = 0;
  double significance = 0.001;
  bool pass = false;

  double critical(double alpha) const { return kolmogorov_critical(alpha) / std::sqrt(static_cast<double>(n)); }
  double critical() const { return critical(significance); }
};

/// sup_x |F_n(x) - F(x)| for a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline KsResult ks_exponential(std::span<const double> samples, double rate, double significance = 0.001) {
  detail::require(samples.size() >= 10, Errc::invalid_input, "KS test needs at least 10 samples");
  detail::require(rate > 0.0, Errc::invalid_input, "rate must be positive");
  for (double x : samples) detail::require(x >= 0.0, Errc::invalid_input, "negative sample in exponential KS test");
  KsResult r;
  r.n = samples.size();
  r.significance = significance;
  r.statistic = ks_statistic(std::vector<double>(samples.begin(), samples.end()),
                             [rate](double x) { return -std::expm1(-rate * x); });
  r.pass = r.statistic < r.critical();
  return r;
}

/// (theoretical quantile, empirical quantile) pairs for plotting.
inline std::vector<std::pair<double, double>> qq_exponential(std::span<const double> samples, double rate) {
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  std::vector<std::pair<double, double>> out(s.size());
  const double n = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    out[i] = {-std::log1p(-p) / rate, s[i]};
  }
  return out;
}

/// Column j of a set of snapshots (one value per replica).
inline std::vector<double> coordinate(std::span<const SpacingVector> zs, std::size_t j) {
  std::vector<double> out;
  out.reserve(zs.size());
  for (const auto& z : zs) out.push_back(z[j]);
  return out;
}

/// Fraction of (time, coordinate) points at which the lower-start spacing
/// exceeds the upper-start spacing by more than 1e-12.
inline double domination_violation(std::span<const std::pair<RunResult, RunResult>> pairs) {
  constexpr double kSlack = 1e-12;
  std::size_t points = 0, bad = 0;
  for (const auto& [lo, hi] : pairs) {
    detail::require(lo.snapshots.size() == hi.snapshots.size(), Errc::invalid_input,
                    "paired runs must share a time grid");
    for (std::size_t s = 0; s < lo.snapshots.size(); ++s) {
      const auto& a = lo.snapshots[s];
      const auto& b = hi.snapshots[s];
      detail::require(a.z.size() == b.z.size() && a.time == b.time, Errc::invalid_input,
                      "paired snapshots must match in time and dimension");
      for (std::size_t j = 0; j < a.z.size(); ++j) {
        ++points;
        if (a.z[j] > b.z[j] + kSlack) ++bad;
      }
    }
  }
  detail::require(points > 0, Errc::invalid_input, "no points to compare");
  return static_cast<double>(bad) / static_cast<double>(points);
}

/// Largest amount by which the ECDF of B exceeds the ECDF of A over the merged
/// sample grid. Positive values are evidence that A sits stochastically above B.
inline double stochastic_dominance(std::span<const double> a, std::span<const double> b) {
  detail::require(!a.empty() && !b.empty(), Errc::invalid_input, "empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  std::size_t ia = 0, ib = 0;
  double best = 0.0;
  while (ia < sa.size() || ib < sb.size()) {
    double x;
    if (ib >= sb.size() || (ia < sa.size() && sa[ia] <= sb[ib])) x = sa[ia];
    else x = sb[ib];
    while (ia < sa.size() && sa[ia] <= x) ++ia;
    while (ib < sb.size() && sb[ib] <= x) ++ib;
    best = std::max(best, static_cast<double>(ib) / nb - static_cast<double>(ia) / na);
  }
  return best;
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::pair<double, double>> points;  // (log t, log variance)
};

/// Least-squares line through (log t, log var).
inline ExponentFit scaling_fit(std::span<const double> times, std::span<const double> variances) {
  detail::require(times.size() == variances.size(), Errc::invalid_input, "scaling_fit: length mismatch");
  detail::require(times.size() >= 3, Errc::invalid_input, "scaling_fit needs at least 3 points");
  ExponentFit fit;
  for (std::size_t i = 0; i < times.size(); ++i) {
    detail::require(times[i] > 0.0, Errc::invalid_input, "times must be positive");
    detail::require(variances[i] > 0.0, Errc::invalid_input, "variances must be positive");
    fit.points.emplace_back(std::log(times[i]), std::log(variances[i]));
  }
  const double n = static_cast<double>(fit.points.size());
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : fit.points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (auto [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  detail::require(sxx > 0.0, Errc::invalid_input, "times must not all coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (auto [x, y] : fit.points) {
    const double e = y - (fit.intercept + fit.slope * x);
    sse += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  std::size_t n = 0;
};

inline SampleSummary summarize(std::span<const double> x) {
  detail::require(x.size() >= 2, Errc::invalid_input, "need at least two samples");
  SampleSummary s;
  s.n = x.size();
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  for (double v : x) s.variance += (v - s.mean) * (v - s.mean);
  s.variance /= static_cast<double>(s.n - 1);
  s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
  return s;
}

// ---------------------------------------------------------------------------
// Coefficient identities for the discrete Laplacians.

/// Row j of the discrete Laplacian acting on the gradient coordinates, as a
/// dense (m-1)x(m-1) matrix. `mixed` selects the Neumann node at j = m-1.
inline std::vector<std::vector<double>> discrete_laplacian(int m, bool mixed) {
  detail::require(m >= 2, Errc::invalid_input, "need m >= 2");
  const auto n = static_cast<std::size_t>(m - 1);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) d[j][j - 1] = 1.0;
    if (j + 1 < n) d[j][j + 1] = 1.0;
    d[j][j] = (mixed && j + 1 == n) ? -1.0 : -2.0;
  }
  return d;
}

namespace detail {
// max_k | 1/2 sum_j w_j D[j][k] + 1{k = 1} |
inline double drift_identity_residual(std::span<const double> weights, const std::vector<std::vector<double>>& d) {
  const std::size_t n = weights.size();
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j) c += 0.5 * weights[j] * d[j][k];
    worst = std::max(worst, std::abs(c + (k == 0 ? 1.0 : 0.0)));
  }
  return worst;
}
}  // namespace detail

/// Residual of 1/2 sum_j alpha_j Delta d_{z_j} = -d_{z_1} with Dirichlet
/// boundaries and alpha_j = 2(1 - j/m).
inline double alpha_identity_check(int m) {
  const auto alpha = atlas_rates(m);
  return detail::drift_identity_residual(alpha, discrete_laplacian(m, false));
}

/// Same identity for the right-anchored system: weights all 2 with the
/// mixed-boundary Laplacian.
inline double anchored_identity_check(int m) {
  const std::vector<double> w(static_cast<std::size_t>(m - 1), 2.0);
  return detail::drift_identity_residual(w, discrete_laplacian(m, true));
}

}  // namespace atlas
