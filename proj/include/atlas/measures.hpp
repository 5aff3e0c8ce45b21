#pragma once

// Product-exponential laws on the spacing orthant, their conditioned
// versions, exact samplers and closed-form relative entropies.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "atlas/error.hpp"
#include "atlas/model.hpp"

namespace atlas {

/// Per-coordinate restriction of an exponential law.
struct Truncation {
  enum class Kind { none, upper, lower };
  Kind kind = Kind::none;
  double bound = 0.0;  // [0, bound] for upper, [bound, inf) for lower

  static Truncation none() { return {}; }
  static Truncation upper(double b) { return {Kind::upper, b}; }
  static Truncation lower(double b) { return {Kind::lower, b}; }
  bool operator==(const Truncation&) const = default;
};

/// Independent Exp(rate_j) coordinates, optionally truncated coordinatewise.
/// An empty truncation vector means no coordinate is truncated.
struct ProductExponentialMeasure {
  std::vector<double> rates;
  std::vector<Truncation> truncation;

  std::size_t dim() const { return rates.size(); }

  Truncation truncation_at(std::size_t j) const {
    return truncation.empty() ? Truncation::none() : truncation[j];
  }

  void validate() const {
    for (double r : rates)
      detail::require(std::isfinite(r) && r > 0.0, Errc::invalid_measure, "rates must be positive");
    detail::require(truncation.empty() || truncation.size() == rates.size(), Errc::invalid_measure,
                    "truncation length must match rates");
    for (const auto& t : truncation) {
      switch (t.kind) {
        case Truncation::Kind::none: break;
        case Truncation::Kind::upper:
          detail::require(t.bound > 0.0, Errc::invalid_measure, "upper truncation needs positive mass");
          break;
        case Truncation::Kind::lower:
          detail::require(t.bound >= 0.0 && std::isfinite(t.bound), Errc::invalid_measure,
                          "lower truncation needs a finite non-negative bound");
          break;
      }
    }
  }
};

/// Invariant spacing law of Atlas_m(gamma): rates 2 gamma (1 - j/m).
inline std::vector<double> atlas_rates(int m, double gamma = 1.0) {
  detail::require(m >= 2, Errc::invalid_measure, "need m >= 2");
  std::vector<double> r(static_cast<std::size_t>(m - 1));
  for (int j = 1; j < m; ++j) r[j - 1] = 2.0 * gamma * (1.0 - static_cast<double>(j) / m);
  return r;
}

inline ProductExponentialMeasure mu_star_finite(int m, double gamma) {
  detail::require(m >= 2, Errc::invalid_measure, "need m >= 2");
  detail::require(std::isfinite(gamma) && gamma > 0.0, Errc::invalid_measure, "gamma must be positive");
  return {atlas_rates(m, gamma), {}};
}

/// Rates lambda + k a, k = 1..m-1.
inline ProductExponentialMeasure mu_lambda_a(int m, double lambda, double a) {
  detail::require(m >= 2, Errc::invalid_measure, "need m >= 2");
  detail::require(std::isfinite(lambda) && lambda > 0.0, Errc::invalid_measure, "lambda must be positive");
  detail::require(std::isfinite(a) && a >= 0.0, Errc::invalid_measure, "a must be non-negative");
  std::vector<double> r(static_cast<std::size_t>(m - 1));
  for (int k = 1; k < m; ++k) r[k - 1] = lambda + k * a;
  return {r, {}};
}

/// mu_star^{(m,2)} conditioned on Z >= z (coordinatewise).
inline ProductExponentialMeasure conditioned_plus(int m, std::span<const double> z) {
  auto mu = mu_star_finite(m, 1.0);
  detail::require(z.size() == mu.dim(), Errc::invalid_measure, "conditioning vector has wrong length");
  for (double v : z) mu.truncation.push_back(Truncation::lower(v));
  mu.validate();
  return mu;
}

/// mu_star^{(m,2)} conditioned on Z <= z (coordinatewise).
inline ProductExponentialMeasure conditioned_minus(int m, std::span<const double> z) {
  auto mu = mu_star_finite(m, 1.0);
  detail::require(z.size() == mu.dim(), Errc::invalid_measure, "conditioning vector has wrong length");
  for (double v : z) mu.truncation.push_back(Truncation::upper(v));
  mu.validate();
  return mu;
}

/// Inverse-CDF draw of one coordinate.
template <class Rng>
double sample_coordinate(double rate, const Truncation& t, Rng& rng) {
  const double u = rng.uniform();
  switch (t.kind) {
    case Truncation::Kind::lower:
      return t.bound - std::log(u) / rate;
    case Truncation::Kind::upper:
      if (std::isinf(t.bound)) return -std::log(u) / rate;
      // F^{-1}(u) = -log(1 - u (1 - e^{-rate b})) / rate
      return -std::log1p(u * std::expm1(-rate * t.bound)) / rate;
    case Truncation::Kind::none:
      break;
  }
  return -std::log(u) / rate;
}

template <class Rng>
SpacingVector sample(const ProductExponentialMeasure& mu, Rng& rng) {
  SpacingVector s;
  s.z.resize(mu.dim());
  for (std::size_t j = 0; j < mu.dim(); ++j) s.z[j] = sample_coordinate(mu.rates[j], mu.truncation_at(j), rng);
  return s;
}

/// Relative entropy of mu_star^{(m,2)} conditioned on [z, inf) with respect to
/// mu_star^{(m,2)}: sum_j alpha_j z_j.
inline double entropy_plus(int m, const SpacingVector& z) {
  const auto alpha = atlas_rates(m);
  detail::require(z.size() == alpha.size(), Errc::invalid_input, "entropy_plus: length must be m-1");
  double h = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    detail::require(z[j] >= 0.0, Errc::invalid_input, "entropy_plus: z must be non-negative");
    h += alpha[j] * z[j];
  }
  return h;
}

/// Relative entropy of mu_star^{(m,2)} conditioned on [0, z] with respect to
/// mu_star^{(m,2)}: sum_j -log(1 - e^{-alpha_j z_j}). A zero coordinate
/// yields +infinity.
inline double entropy_minus(int m, const SpacingVector& z) {
  const auto alpha = atlas_rates(m);
  detail::require(z.size() == alpha.size(), Errc::invalid_input, "entropy_minus: length must be m-1");
  double h = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    detail::require(z[j] >= 0.0, Errc::invalid_input, "entropy_minus: z must be non-negative");
    if (z[j] == 0.0) return std::numeric_limits<double>::infinity();
    h += -std::log(-std::expm1(-alpha[j] * z[j]));
  }
  return h;
}

/// KL divergence of prod Exp(from_j) from prod Exp(to_j).
inline double kl_product_exp(std::span<const double> from, std::span<const double> to) {
  detail::require(from.size() == to.size(), Errc::invalid_input, "kl_product_exp: length mismatch");
  double h = 0.0;
  for (std::size_t j = 0; j < from.size(); ++j) {
    detail::require(from[j] > 0.0 && to[j] > 0.0, Errc::invalid_input, "kl_product_exp: rates must be positive");
    const double r = to[j] / from[j];
    // log(1/r) + r - 1, accurate near r = 1
    h += (r - 1.0) - std::log1p(r - 1.0);
  }
  return h;
}

/// Log density of the (possibly truncated) product law; -infinity outside the support.
inline double log_density(const ProductExponentialMeasure& mu, const SpacingVector& z) {
  detail::require(z.size() == mu.dim(), Errc::invalid_input, "log_density: length mismatch");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double lp = 0.0;
  for (std::size_t j = 0; j < mu.dim(); ++j) {
    const double r = mu.rates[j];
    const double x = z[j];
    if (x < 0.0) return kNegInf;
    const auto t = mu.truncation_at(j);
    switch (t.kind) {
      case Truncation::Kind::none:
        lp += std::log(r) - r * x;
        break;
      case Truncation::Kind::lower:
        if (x < t.bound) return kNegInf;
        lp += std::log(r) - r * (x - t.bound);
        break;
      case Truncation::Kind::upper:
        if (x > t.bound) return kNegInf;
        lp += std::log(r) - r * x - std::log(-std::expm1(-r * t.bound));
        break;
    }
  }
  return lp;
}

/// Coordinate means (reciprocal rates, adjusted for truncation).
inline std::vector<double> mean(const ProductExponentialMeasure& mu) {
  std::vector<double> out(mu.dim());
  for (std::size_t j = 0; j < mu.dim(); ++j) {
    const double r = mu.rates[j];
    const auto t = mu.truncation_at(j);
    if (t.kind == Truncation::Kind::lower) {
      out[j] = t.bound + 1.0 / r;
    } else if (t.kind == Truncation::Kind::upper && std::isfinite(t.bound)) {
      const double rb = r * t.bound;
      out[j] = 1.0 / r - t.bound / std::expm1(rb);
    } else {
      out[j] = 1.0 / r;
    }
  }
  return out;
}

}  // namespace atlas
