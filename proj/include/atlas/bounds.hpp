#pragma once

// Explicit probability bounds for the semi-infinite Atlas system and the
// truncation planner that certifies when a finite system reproduces the
// bottom spacings of the infinite one up to a horizon t_m.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "atlas/error.hpp"

namespace atlas {

/// Standard normal upper tail P(N > a).
inline double gaussian_tail(double a) {
  detail::require(!std::isnan(a), Errc::invalid_input, "gaussian_tail of NaN");
  return 0.5 * std::erfc(a / std::numbers::sqrt2);
}

/// log P(N > a), finite for all finite a.
inline double log_gaussian_tail(double a) {
  if (a < 30.0) return std::log(gaussian_tail(a));
  // Asymptotic series of the Mills ratio.
  const double a2 = a * a;
  const double series = 1.0 - 1.0 / a2 + 3.0 / (a2 * a2) - 15.0 / (a2 * a2 * a2);
  return -0.5 * a2 - std::log(a * std::sqrt(2.0 * std::numbers::pi)) + std::log(series);
}

inline double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

/// P(sup_{s<=t} X_1(s) >= Gamma) <= 2 G((l Gamma - t - sum_{j<=l} X_j(0)) / sqrt(l t)).
inline double leftmost_sup_bound(double prefix_sum, long ell, double t, double gamma_level) {
  detail::require(ell >= 1, Errc::invalid_bound, "averaging block must be >= 1");
  detail::require(t > 0.0, Errc::invalid_bound, "horizon must be positive");
  if (std::isinf(gamma_level)) return gamma_level > 0 ? 0.0 : 1.0;
  const double l = static_cast<double>(ell);
  return clamp_probability(2.0 * gaussian_tail((l * gamma_level - t - prefix_sum) / std::sqrt(l * t)));
}

/// Bound on P(sup_{s<=t} X_k(s) >= Gamma) for k >= 2, with
/// Gamma_k = (Gamma - X_k(0)) / 3 > 0 and X_1(0) >= 0.
inline double kth_sup_bound(double prefix_sum, long ell, double t, double gamma_level, int k, double xk0) {
  detail::require(k >= 2, Errc::invalid_bound, "kth_sup_bound needs k >= 2");
  detail::require(ell >= 1, Errc::invalid_bound, "averaging block must be >= 1");
  detail::require(t > 0.0, Errc::invalid_bound, "horizon must be positive");
  if (std::isinf(gamma_level) && gamma_level > 0) return 0.0;
  const double gk = (gamma_level - xk0) / 3.0;
  detail::require(gk > 0.0, Errc::invalid_bound, "need Gamma > X_k(0)");
  const double l = static_cast<double>(ell);
  const double first = 2.0 * gaussian_tail((l * gk - t - prefix_sum) / std::sqrt(l * t));
  const double second = 4.0 * k * gaussian_tail(gk / std::sqrt(t));
  return clamp_probability(first + second);
}

struct BulkBoundOptions {
  double tol = 1e-12;
  long max_terms = 1'000'000;
};

/// Bound on P(some particle i > m gets to Gamma or below before t):
/// 2 sum_{i>m} G((X_i(0) - Gamma)/sqrt t).
///
/// `position(i)` returns X_i(0) for i = m+1, m+2, ... (non-decreasing,
/// possibly +inf). Terms are summed until the geometric remainder estimate
/// term * r / (1 - r), with r the ratio of consecutive terms, falls below
/// tol / 2 (valid because the terms are log-concave in the position). Returns
/// 1 when the terms do not decay within max_terms.
template <class Position>
double bulk_inf_bound(Position&& position, long m, double gamma_level, double t, BulkBoundOptions opt = {}) {
  detail::require(t > 0.0, Errc::invalid_bound, "horizon must be positive");
  detail::require(opt.tol > 0.0, Errc::invalid_bound, "tolerance must be positive");
  const double st = std::sqrt(t);
  double sum = 0.0;
  double prev_log = std::numeric_limits<double>::quiet_NaN();
  double prev_x = -std::numeric_limits<double>::infinity();
  for (long n = 1; n <= opt.max_terms; ++n) {
    const double x = position(m + n);
    detail::require(!std::isnan(x), Errc::invalid_bound, "tail position is NaN");
    detail::require(x >= prev_x, Errc::invalid_bound, "tail positions must be non-decreasing");
    prev_x = x;
    if (std::isinf(x)) return clamp_probability(sum);  // every later particle is at +inf
    const double lg = std::log(2.0) + log_gaussian_tail((x - gamma_level) / st);
    const double term = std::exp(lg);
    sum += term;
    if (sum >= 1.0) return 1.0;
    if (!std::isnan(prev_log)) {
      const double log_ratio = lg - prev_log;
      if (log_ratio < 0.0) {
        const double r = std::exp(log_ratio);
        const double log_remainder = lg + log_ratio - std::log1p(-r);
        if (log_remainder < std::log(0.5 * opt.tol)) return clamp_probability(sum + std::exp(log_remainder));
      }
    }
    prev_log = lg;
  }
  return 1.0;
}

/// P(D(t) >= x) <= e^{-x/c1} (e^{-t} e^{c1 D0} + c2), c1 = max_j max(v_j, 1/v_j).
inline double lyapunov_tail(const std::vector<double>& v, double c2, double d0, double t, double x) {
  detail::require(!v.empty(), Errc::invalid_bound, "Lyapunov vector must be non-empty");
  double c1 = 0.0;
  for (double vj : v) {
    detail::require(vj > 0.0, Errc::invalid_bound, "Lyapunov vector must be positive");
    c1 = std::max({c1, vj, 1.0 / vj});
  }
  detail::require(c2 > 0.0 && d0 >= 0.0 && t >= 0.0 && x > 0.0, Errc::invalid_bound, "bad Lyapunov arguments");
  if (std::isinf(x)) return 0.0;
  // Work in logs so that large c1 D0 does not overflow.
  const double la = -t + c1 * d0;
  const double lb = std::log(c2);
  const double hi = std::max(la, lb);
  const double log_bracket = hi + std::log(std::exp(la - hi) + std::exp(lb - hi));
  return clamp_probability(std::exp(-x / c1 + log_bracket));
}

inline double lyapunov_c1(const std::vector<double>& v) {
  double c1 = 0.0;
  for (double vj : v) c1 = std::max({c1, vj, 1.0 / vj});
  return c1;
}

// ---------------------------------------------------------------------------
// Growth hypotheses on the initial spacings.

using ScaleFn = std::function<double(double)>;

struct HypothesisReport {
  double beta = 1.0;
  double beta_prime = 0.5;
  long window_lo = 0, window_hi = 0, window_mid = 0;
  // Window maxima/minima, overall and for the two halves split at the
  // geometric midpoint.
  double a_max = 0.0, a_max_first = 0.0, a_max_second = 0.0;
  double b_max = 0.0, b_max_first = 0.0, b_max_second = 0.0;
  double c_min = 0.0, c_min_first = 0.0, c_min_second = 0.0;
  bool e1_pass = false;  // sum (log z_j)_- grows no faster than m^beta theta(m)
  bool e2_pass = false;  // sum z_j grows no faster than m^beta theta(m)
  bool e3_pass = false;  // sum z_j outgrows m^beta' theta(m)
  long theta_decreases = 0;  // window points where theta(m) < theta(m-1)

  bool all_pass() const { return e1_pass && e2_pass && e3_pass; }
};

/// Finite-window surrogates of the growth conditions. The window [lo, hi] is
/// split at sqrt(lo*hi); the upper-growth conditions pass when the second-half
/// maximum is at most twice the first-half maximum, and the divergence
/// condition passes when the second-half minimum is at least twice the
/// first-half minimum. `z` must have at least hi entries (z[0] = z_1).
inline HypothesisReport hypothesis_report(const std::vector<double>& z, double beta, const ScaleFn& theta, long lo,
                                          long hi) {
  detail::require(beta >= 1.0 && beta < 2.0, Errc::invalid_input, "beta must lie in [1, 2)");
  detail::require(lo >= 1 && hi > lo, Errc::invalid_input, "window must be non-empty with lo < hi");
  detail::require(static_cast<long>(z.size()) >= hi, Errc::invalid_input, "not enough spacings for the window");
  HypothesisReport rep;
  rep.beta = beta;
  rep.beta_prime = beta * beta / (1.0 + beta);
  rep.window_lo = lo;
  rep.window_hi = hi;
  rep.window_mid = std::lround(std::sqrt(static_cast<double>(lo) * static_cast<double>(hi)));

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double s = 0.0, neg_log = 0.0;
  rep.a_max_first = rep.a_max_second = 0.0;
  rep.b_max_first = rep.b_max_second = 0.0;
  rep.c_min_first = rep.c_min_second = kInf;
  double prev_theta = std::numeric_limits<double>::quiet_NaN();
  for (long m = 1; m <= hi; ++m) {
    const double zj = z[m - 1];
    detail::require(zj >= 0.0, Errc::invalid_input, "spacings must be non-negative");
    s += zj;
    neg_log += zj > 0.0 ? std::max(0.0, -std::log(zj)) : kInf;
    if (m < lo) continue;
    const double th = theta(static_cast<double>(m));
    detail::require(th > 0.0, Errc::invalid_input, "theta must be positive");
    if (beta == 1.0)
      detail::require(th >= std::log(static_cast<double>(m)), Errc::invalid_input,
                      "beta = 1 requires theta(m) >= log m on the window");
    if (!std::isnan(prev_theta) && th < prev_theta) ++rep.theta_decreases;
    prev_theta = th;
    const double md = static_cast<double>(m);
    const double a = s / (std::pow(md, beta) * th);
    const double b = neg_log / (std::pow(md, beta) * th);
    const double c = s / (std::pow(md, rep.beta_prime) * th);
    const bool first = m < rep.window_mid;
    (first ? rep.a_max_first : rep.a_max_second) = std::max(first ? rep.a_max_first : rep.a_max_second, a);
    (first ? rep.b_max_first : rep.b_max_second) = std::max(first ? rep.b_max_first : rep.b_max_second, b);
    (first ? rep.c_min_first : rep.c_min_second) = std::min(first ? rep.c_min_first : rep.c_min_second, c);
  }
  rep.a_max = std::max(rep.a_max_first, rep.a_max_second);
  rep.b_max = std::max(rep.b_max_first, rep.b_max_second);
  rep.c_min = std::min(rep.c_min_first, rep.c_min_second);
  rep.e2_pass = std::isfinite(rep.a_max) && rep.a_max_second <= 2.0 * rep.a_max_first;
  rep.e1_pass = std::isfinite(rep.b_max) && rep.b_max_second <= 2.0 * rep.b_max_first;
  rep.e3_pass = rep.c_min_second >= 2.0 * rep.c_min_first && rep.c_min_first > 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Truncation planning.

/// Schedule t_m, Gamma_m, l_m for a given m.
struct Schedule {
  double t = 0.0;
  double gamma_level = 0.0;
  long ell = 0;
};

inline Schedule truncation_schedule(long m, double beta, const ScaleFn& theta, const ScaleFn& psi) {
  const double md = static_cast<double>(m);
  const double bp = beta * beta / (1.0 + beta);
  const double th = theta(md), ps = psi(md);
  Schedule s;
  s.t = 2.0 * std::pow(md, beta) * th * ps;
  s.gamma_level = 36.0 * std::pow(md, bp) * th * std::pow(ps, beta / (1.0 + beta));
  s.ell = static_cast<long>(std::floor(std::pow(md, beta / (1.0 + beta)) * std::pow(ps, 1.0 / (1.0 + beta))));
  return s;
}

struct TruncationPlan {
  int k = 0;
  long m = 0;
  double t_m = 0.0;
  double gamma_m = 0.0;
  long ell_m = 0;
  double epsilon = 0.0;        // requested failure budget
  double epsilon_bound = 0.0;  // achieved bound on P(A_m fails)
  double top_bound = 0.0;      // kth_sup_bound part
  double bulk_bound = 0.0;     // bulk_inf_bound part
  double kappa = 0.0;
  double beta = 1.0;
  double x_m0 = 0.0;           // X_m(0)
  double x_k0 = 0.0;           // X_k(0)
};

struct PlanOptions {
  long m_min = 2;
  long m_max = 10'000'000;
  BulkBoundOptions bulk{};
};

/// Initial ranked positions X_i(0) = sum_{j<i} z_j (X_1(0) = 0), extended on
/// demand from a spacing rule z(j), j >= 1.
class InitialPositions {
 public:
  explicit InitialPositions(std::function<double(long)> z) : z_(std::move(z)) {}

  double x(long i) {
    extend(i);
    return x_[static_cast<std::size_t>(i - 1)];
  }
  /// sum_{j<=l} X_j(0)
  double prefix(long l) {
    extend(l);
    return cum_[static_cast<std::size_t>(l - 1)];
  }

 private:
  void extend(long i) {
    while (static_cast<long>(x_.size()) < i) {
      const long next = static_cast<long>(x_.size()) + 1;  // index being added
      const double xv = x_.empty() ? 0.0 : x_.back() + z_(next - 1);
      x_.push_back(xv);
      cum_.push_back((cum_.empty() ? 0.0 : cum_.back()) + xv);
    }
  }

  std::function<double(long)> z_;
  std::vector<double> x_, cum_;
};

/// Smallest m in [m_min, m_max] such that
///   (a) Gamma_m l_m / 12 >= t_m >= l_m^{1+beta} theta(l_m) with l_m >= 1,
///   (b) X_m(0) >= (kappa + 1) Gamma_m,
///   (c) kth_sup_bound + bulk_inf_bound <= epsilon.
/// Throws plan-infeasible naming the constraint that failed most often.
inline TruncationPlan truncation_plan(const std::function<double(long)>& z, int k, double beta, const ScaleFn& theta,
                                      const ScaleFn& psi, double epsilon, double kappa, PlanOptions opt = {}) {
  detail::require(k >= 2, Errc::invalid_input, "need k >= 2 protected spacings");
  detail::require(beta >= 1.0 && beta < 2.0, Errc::invalid_input, "beta must lie in [1, 2)");
  detail::require(epsilon > 0.0, Errc::invalid_input, "epsilon must be positive");
  detail::require(kappa > 0.0, Errc::invalid_input, "kappa must be positive");
  detail::require(opt.m_min >= 2 && opt.m_max >= opt.m_min, Errc::invalid_input, "bad search range");
  InitialPositions pos(z);
  long fail_a = 0, fail_b = 0, fail_c = 0;
  double best_c = std::numeric_limits<double>::infinity();
  const long m_lo = std::max<long>(opt.m_min, k + 1);
  for (long m = m_lo; m <= opt.m_max; ++m) {
    const Schedule s = truncation_schedule(m, beta, theta, psi);
    const bool sched_ok = s.ell >= 1 && s.gamma_level * static_cast<double>(s.ell) / 12.0 >= s.t &&
                          s.t >= std::pow(static_cast<double>(s.ell), 1.0 + beta) * theta(static_cast<double>(s.ell));
    if (!sched_ok) {
      ++fail_a;
      continue;
    }
    const double xm = pos.x(m);
    if (xm < (kappa + 1.0) * s.gamma_level) {
      ++fail_b;
      continue;
    }
    const double xk = pos.x(k);
    if (!(s.gamma_level > xk)) {
      ++fail_c;
      continue;
    }
    const double top = kth_sup_bound(pos.prefix(s.ell), s.ell, s.t, s.gamma_level, k, xk);
    const double bulk = bulk_inf_bound([&](long i) { return pos.x(i); }, m, s.gamma_level, s.t, opt.bulk);
    best_c = std::min(best_c, top + bulk);
    if (top + bulk > epsilon) {
      ++fail_c;
      continue;
    }
    TruncationPlan p;
    p.k = k;
    p.m = m;
    p.t_m = s.t;
    p.gamma_m = s.gamma_level;
    p.ell_m = s.ell;
    p.epsilon = epsilon;
    p.epsilon_bound = top + bulk;
    p.top_bound = top;
    p.bulk_bound = bulk;
    p.kappa = kappa;
    p.beta = beta;
    p.x_m0 = xm;
    p.x_k0 = xk;
    return p;
  }
  std::ostringstream msg;
  const char* binding = fail_b >= fail_a && fail_b >= fail_c ? "X_m(0) >= (kappa+1) Gamma_m"
                        : fail_a >= fail_c                   ? "schedule Gamma_m l_m / 12 >= t_m >= l_m^(1+beta) theta(l_m)"
                                                             : "failure-probability budget";
  msg << "no admissible m in [" << m_lo << ", " << opt.m_max << "]; binding constraint: " << binding
      << " (schedule failures " << fail_a << ", position failures " << fail_b << ", budget failures " << fail_c;
  if (std::isfinite(best_c)) msg << ", best bound " << best_c;
  msg << ")";
  throw Error(Errc::plan_infeasible, msg.str());
}

/// kappa with (18 kappa)^2 = kappa_prime.
inline double kappa_from_prime(double kappa_prime) { return std::sqrt(kappa_prime) / 18.0; }

}  // namespace atlas
