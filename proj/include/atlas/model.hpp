#pragma once

// Domain types for competing Brownian particle systems and the conversions
// between named positions, ranked positions and spacings.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "atlas/error.hpp"

namespace atlas {

/// Drift and diffusion coefficients indexed by rank, plus the anchoring flag.
/// With right_anchored set, the particle of rank m never moves.
struct ModelSpec {
  int m = 0;
  std::vector<double> drift;      // gamma_1..gamma_m
  std::vector<double> diffusion;  // sigma_1..sigma_m
  bool right_anchored = false;

  std::size_t gaps() const { return static_cast<std::size_t>(m - 1); }

  void validate() const {
    detail::require(m >= 2, Errc::invalid_model, "particle count must be at least 2");
    detail::require(drift.size() == static_cast<std::size_t>(m) &&
                        diffusion.size() == static_cast<std::size_t>(m),
                    Errc::invalid_model, "drift/diffusion length must equal m");
    for (double g : drift)
      detail::require(std::isfinite(g), Errc::invalid_model, "drift must be finite");
    for (double s : diffusion)
      detail::require(std::isfinite(s) && s > 0.0, Errc::invalid_model,
                      "diffusion coefficients must be positive");
  }

  /// True when only the leftmost particle drifts and every sigma is one.
  bool is_atlas_form() const {
    for (int j = 1; j < m; ++j)
      if (drift[j] != 0.0) return false;
    for (double s : diffusion)
      if (s != 1.0) return false;
    return true;
  }
};

inline ModelSpec make_atlas(int m, double gamma, bool right_anchored = false) {
  detail::require(m >= 2, Errc::invalid_model, "Atlas model needs m >= 2 (no spacing exists)");
  detail::require(std::isfinite(gamma) && gamma >= 0.0, Errc::invalid_model,
                  "Atlas drift must be non-negative");
  ModelSpec spec;
  spec.m = m;
  spec.drift.assign(m, 0.0);
  spec.drift[0] = gamma;
  spec.diffusion.assign(m, 1.0);
  spec.right_anchored = right_anchored;
  return spec;
}

/// Positions indexed by particle name (Y_1..Y_m).
struct NamedConfiguration {
  std::vector<double> positions;
};

/// Positions sorted by rank (X_1 <= ... <= X_m).
struct RankedConfiguration {
  std::vector<double> positions;
};

/// Gaps between consecutive ranked particles, all non-negative.
struct SpacingVector {
  std::vector<double> z;

  std::size_t size() const { return z.size(); }
  double operator[](std::size_t i) const { return z[i]; }
  double& operator[](std::size_t i) { return z[i]; }
  bool operator==(const SpacingVector&) const = default;
};

/// Cumulative local times L_1..L_{m-1}; L_0 = L_m = 0 are implicit.
struct LocalTimeLedger {
  std::vector<double> L;
};

struct Ranking {
  RankedConfiguration ranked;
  // permutation[i] is the (1-based) rank of named particle i.
  std::vector<int> permutation;
};

/// Stable ranking: among ties the lower named index receives the lower rank.
inline Ranking rank(const NamedConfiguration& named) {
  const auto& y = named.positions;
  for (double v : y)
    detail::require(std::isfinite(v), Errc::invalid_input, "non-finite coordinate in rank()");
  std::vector<int> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });
  Ranking out;
  out.ranked.positions.resize(y.size());
  out.permutation.resize(y.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.ranked.positions[r] = y[order[r]];
    out.permutation[order[r]] = static_cast<int>(r) + 1;
  }
  return out;
}

inline SpacingVector spacings(const RankedConfiguration& ranked) {
  const auto& x = ranked.positions;
  SpacingVector s;
  if (x.size() < 2) return s;
  s.z.resize(x.size() - 1);
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    detail::require(std::isfinite(x[k]) && std::isfinite(x[k + 1]), Errc::invalid_input,
                    "non-finite position");
    detail::require(x[k + 1] >= x[k], Errc::invalid_input, "ranked positions must be non-decreasing");
    s.z[k] = x[k + 1] - x[k];
  }
  return s;
}

inline RankedConfiguration positions_from_spacings(double x1, const SpacingVector& s) {
  RankedConfiguration out;
  out.positions.resize(s.size() + 1);
  out.positions[0] = x1;
  for (std::size_t k = 0; k < s.size(); ++k) {
    detail::require(s.z[k] >= 0.0, Errc::invalid_input, "negative spacing");
    out.positions[k + 1] = out.positions[k] + s.z[k];
  }
  return out;
}

inline void validate_spacing(const SpacingVector& s, std::size_t expected_len) {
  detail::require(s.size() == expected_len, Errc::invalid_input, "spacing vector has wrong length");
  for (double v : s.z)
    detail::require(std::isfinite(v) && v >= 0.0, Errc::invalid_input,
                    "spacings must be finite and non-negative");
}

}  // namespace atlas
