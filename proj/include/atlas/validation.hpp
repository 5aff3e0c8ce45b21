#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "atlas/bounds.hpp"
#include "atlas/engine.hpp"

namespace atlas {

/// Monte Carlo check of a truncation plan on a system of 2m named particles.
struct TruncationCheck {
  std::size_t runs = 0;
  std::size_t failures = 0;          // an outsider in the bottom k, or X_k >= Gamma_m, before t_m
  std::size_t outsiders_below = 0;   // an outsider at or below Gamma_m before t_m
  double max_xk = -std::numeric_limits<double>::infinity();

  double frequency() const { return runs ? static_cast<double>(failures) / static_cast<double>(runs) : 0.0; }
  double outsider_frequency() const {
    return runs ? static_cast<double>(outsiders_below) / static_cast<double>(runs) : 0.0;
  }
};

/// `positions(i)` gives X_i(0) for i = 1..2m. Particles with initial index
/// above plan.m are outsiders. Run r uses replica r of PathBundle(seed, dt).
template <class Positions>
TruncationCheck check_truncation_plan(const TruncationPlan& plan, Positions&& positions, std::size_t runs, double dt,
                                      std::uint64_t seed, unsigned threads = default_threads()) {
  detail::require(plan.m >= plan.k && plan.k >= 1, Errc::invalid_input, "plan needs m >= k >= 1");
  detail::require(runs >= 1, Errc::invalid_input, "need at least one run");
  const long n = 2 * plan.m;
  const auto k = static_cast<std::size_t>(plan.k);
  const auto m = static_cast<std::size_t>(plan.m);
  std::vector<double> y0(static_cast<std::size_t>(n));
  for (long i = 1; i <= n; ++i) y0[static_cast<std::size_t>(i - 1)] = positions(i);
  for (std::size_t i = 1; i < y0.size(); ++i)
    detail::require(y0[i] >= y0[i - 1], Errc::invalid_input, "initial positions must be non-decreasing");

  const auto spec = make_atlas(static_cast<int>(n), 1.0);
  const long long steps = static_cast<long long>(std::ceil(plan.t_m / dt));
  const PathBundle paths(seed, dt);
  std::vector<char> failed(runs, 0), below(runs, 0);
  std::vector<double> max_xk(runs, -std::numeric_limits<double>::infinity());

  parallel_for(runs, threads, [&](std::size_t r) {
    std::vector<std::size_t> bottom(k);
    run_named(spec, y0, steps, dt, paths, r, [&](long long, std::span<const double> y) {
      // Indices of the k lowest particles, kept sorted by position.
      for (std::size_t i = 0; i < k; ++i) bottom[i] = i;
      std::sort(bottom.begin(), bottom.end(), [&](std::size_t p, std::size_t q) { return y[p] < y[q]; });
      for (std::size_t i = k; i < y.size(); ++i) {
        if (y[i] >= y[bottom[k - 1]]) continue;
        std::size_t pos = k - 1;
        while (pos > 0 && y[bottom[pos - 1]] > y[i]) {
          bottom[pos] = bottom[pos - 1];
          --pos;
        }
        bottom[pos] = i;
      }
      const double xk = y[bottom[k - 1]];
      max_xk[r] = std::max(max_xk[r], xk);
      if (xk >= plan.gamma_m) failed[r] = 1;
      for (std::size_t b : bottom)
        if (b >= m) failed[r] = 1;
      if (!below[r])
        for (std::size_t i = m; i < y.size(); ++i)
          if (y[i] <= plan.gamma_m) {
            below[r] = 1;
            break;
          }
      return true;
    });
  });

  TruncationCheck out;
  out.runs = runs;
  out.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  out.outsiders_below = static_cast<std::size_t>(std::count(below.begin(), below.end(), 1));
  out.max_xk = *std::max_element(max_xk.begin(), max_xk.end());
  return out;
}

}  // namespace atlas
