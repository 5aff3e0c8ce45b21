#pragma once

// Time stepping for rank-based particle systems.
//
// Two representations are supported: named particles (explicit Euler on the
// SDE with drift/diffusion assigned by the pre-step rank) and spacings (the
// free increment followed by a discrete Skorokhod reflection). The spacing
// scheme also integrates the leading particle X_1 with its own -dL_1 term.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "atlas/error.hpp"
#include "atlas/model.hpp"
#include "atlas/parallel.hpp"
#include "atlas/rng.hpp"
#include "atlas/skorokhod.hpp"

namespace atlas {

enum class ReflectionScheme {
  // Reflect the post-step free value only (w = z~ + R dL).
  projection,
  // Reflect the sampled minimum of the Brownian bridge between z and z~ for a
  // gap that dips below zero alone; a dip shared with a neighbouring gap is
  // reflected at its endpoint.
  bridge,
};

struct EngineOptions {
  ReflectionScheme scheme = ReflectionScheme::bridge;
  SkorokhodOptions skorokhod{};
  double x1 = 0.0;            // initial leading-particle position
  std::uint64_t replica = 0;  // increment sub-stream
};

// ---------------------------------------------------------------------------
// Named particles

/// Advances named particles by one explicit Euler step. Keeps a rank order
/// between calls so that re-sorting a nearly sorted system is linear.
class NamedStepper {
 public:
  explicit NamedStepper(ModelSpec spec) : spec_(std::move(spec)), atlas_form_(spec_.is_atlas_form()) {
    spec_.validate();
  }

  const ModelSpec& spec() const { return spec_; }

  void advance(std::span<double> y, double dt, std::span<const double> xi) {
    detail::require(dt > 0.0, Errc::invalid_step, "time step must be positive");
    detail::require(y.size() == static_cast<std::size_t>(spec_.m) && xi.size() == y.size(),
                    Errc::invalid_input, "named step: length mismatch");
    const double sdt = std::sqrt(dt);
    const std::size_t m = y.size();
    if (atlas_form_) {
      // Only the minimum drifts and every sigma is one: no full ranking needed.
      std::size_t lo = 0, hi = 0;
      for (std::size_t i = 1; i < m; ++i) {
        if (y[i] < y[lo]) lo = i;
        if (y[i] >= y[hi]) hi = i;
      }
      const double g = spec_.drift[0];
      for (std::size_t i = 0; i < m; ++i) {
        if (spec_.right_anchored && i == hi) continue;
        y[i] += sdt * xi[i];
      }
      if (!(spec_.right_anchored && lo == hi)) y[lo] += g * dt;
      return;
    }
    update_order(y);
    rank_of_.resize(m);
    for (std::size_t r = 0; r < m; ++r) rank_of_[order_[r]] = r;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t r = rank_of_[i];
      if (spec_.right_anchored && r + 1 == m) continue;
      y[i] += spec_.drift[r] * dt + spec_.diffusion[r] * sdt * xi[i];
    }
  }

 private:
  void update_order(std::span<const double> y) {
    const std::size_t m = y.size();
    if (order_.size() != m) {
      order_.resize(m);
      std::iota(order_.begin(), order_.end(), std::size_t{0});
    }
    auto before = [&](std::size_t a, std::size_t b) { return y[a] < y[b] || (y[a] == y[b] && a < b); };
    for (std::size_t i = 1; i < m; ++i) {
      const std::size_t v = order_[i];
      std::size_t k = i;
      while (k > 0 && before(v, order_[k - 1])) {
        order_[k] = order_[k - 1];
        --k;
      }
      order_[k] = v;
    }
  }

  ModelSpec spec_;
  bool atlas_form_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rank_of_;
};

inline NamedConfiguration step_named(const ModelSpec& spec, const NamedConfiguration& y, double dt,
                                     std::span<const double> xi) {
  NamedStepper stepper(spec);
  NamedConfiguration out = y;
  stepper.advance(out.positions, dt, xi);
  return out;
}

// ---------------------------------------------------------------------------
// Spacings

namespace detail {
// Minimum of a Brownian bridge from a to b with total variance s2, given a
// uniform u in (0,1).
inline double bridge_minimum(double a, double b, double s2, double u) {
  const double d = b - a;
  return 0.5 * (a + b - std::sqrt(d * d - 2.0 * s2 * std::log(u)));
}
}  // namespace detail

struct SpacingStep {
  SpacingVector z;
  std::vector<double> dL;
};

/// One-step reflected update of the spacing vector with reusable buffers.
class SpacingStepper {
 public:
  SpacingStepper(ModelSpec spec, double dt, EngineOptions opts = {})
      : spec_(std::move(spec)), dt_(dt), opts_(opts) {
    spec_.validate();
    detail::require(dt > 0.0 && std::isfinite(dt), Errc::invalid_step, "time step must be positive");
    const std::size_t n = spec_.gaps();
    diag_ = reflection_diagonal(n, spec_.right_anchored);
    free_.resize(n);
    q_.resize(n);
    var_.resize(n);
    const auto m = static_cast<std::size_t>(spec_.m);
    drift_dt_.resize(m);
    scale_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const bool frozen = spec_.right_anchored && i + 1 == m;
      drift_dt_[i] = frozen ? 0.0 : spec_.drift[i] * dt_;
      scale_[i] = frozen ? 0.0 : spec_.diffusion[i] * std::sqrt(dt_);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double lower = spec_.diffusion[j];
      const bool frozen_top = spec_.right_anchored && j + 2 == static_cast<std::size_t>(spec_.m);
      const double upper = frozen_top ? 0.0 : spec_.diffusion[j + 1];
      var_[j] = (lower * lower + upper * upper) * dt_;
    }
  }

  const ModelSpec& spec() const { return spec_; }
  double dt() const { return dt_; }
  const EngineOptions& options() const { return opts_; }

  /// Advances z in place. `xi` holds the ranked increments (length m);
  /// `uniform(j)` supplies the bridge uniform of coordinate j and is only
  /// called under the bridge scheme. dL receives the local-time increments.
  /// Returns the X_1 increment.
  template <class Uniform>
  double advance(std::span<double> z, std::span<const double> xi, Uniform&& uniform, std::span<double> dL) {
    const std::size_t n = spec_.gaps();
    const auto m = static_cast<std::size_t>(spec_.m);
    detail::require(z.size() == n && dL.size() == n, Errc::invalid_input, "spacing step: length mismatch");
    detail::require(xi.size() == m, Errc::invalid_input, "spacing step: need one increment per particle");
    if (dL.data() != last_dL_) {
      // A different output buffer: clear it fully and forget the old support.
      std::fill(dL.begin(), dL.end(), 0.0);
      ws_.support.clear();
      last_dL_ = dL.data();
    }

    // Free increment of each particle (drift plus noise); the frozen top
    // particle of a right-anchored system does not move.
    inc_.resize(m);
    for (std::size_t i = 0; i < m; ++i) inc_[i] = drift_dt_[i] + scale_[i] * xi[i];

    seeds_.clear();
    const bool bridge = opts_.scheme == ReflectionScheme::bridge;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = z[j];
      const double b = a + inc_[j + 1] - inc_[j];
      free_[j] = b;
      double q = b;
      if (bridge) {
        if (b <= 0.0 || 2.0 * a * b < kBridgeCutoff * var_[j]) {
          q = detail::bridge_minimum(a, b, var_[j], uniform(j));
        } else {
          q = kUnset;
        }
      }
      q_[j] = q;
    }
    if (bridge) {
      // Adjacent gaps that both dip are reflected at their endpoints.
      bool prev_dip = false;
      for (std::size_t j = 0; j < n; ++j) {
        const bool dip = q_[j] < 0.0;
        const bool next_dip = j + 1 < n && q_[j + 1] < 0.0;
        if (dip && (prev_dip || next_dip)) q_[j] = free_[j];
        prev_dip = dip;
      }
    }
    for (std::size_t j = 0; j < n; ++j)
      if (q_[j] < 0.0) seeds_.push_back(j);

    auto qf = [&](std::size_t j) {
      if (std::isnan(q_[j])) q_[j] = detail::bridge_minimum(z[j], free_[j], var_[j], uniform(j));
      return q_[j];
    };
    solve_skorokhod(qf, diag_, seeds_, dL, ws_, opts_.skorokhod);

    for (std::size_t j = 0; j < n; ++j) z[j] = std::max(0.0, free_[j]);
    for (std::size_t j : ws_.support) {
      const std::size_t lo = j > 0 ? j - 1 : 0;
      const std::size_t hi = std::min(n - 1, j + 1);
      for (std::size_t k = lo; k <= hi; ++k) z[k] = std::max(0.0, reflected_value(free_[k], diag_, dL, k));
    }
    return inc_[0] - dL[0];
  }

  /// Indices with a positive local-time increment in the last step.
  std::span<const std::size_t> pushed() const { return ws_.support; }

  /// Projection-only overload.
  double advance(std::span<double> z, std::span<const double> xi, std::span<double> dL) {
    detail::require(opts_.scheme == ReflectionScheme::projection, Errc::invalid_input,
                    "bridge scheme needs bridge uniforms");
    return advance(z, xi, [](std::size_t) { return 0.5; }, dL);
  }

 private:
  // Skip the bridge draw when the crossing probability exp(-2ab/s2) < e^-40.
  static constexpr double kBridgeCutoff = 40.0;
  static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  ModelSpec spec_;
  double dt_;
  EngineOptions opts_;
  std::vector<double> diag_, free_, q_, var_, drift_dt_, scale_, inc_;
  std::vector<std::size_t> seeds_;
  const double* last_dL_ = nullptr;
  SkorokhodWorkspace ws_;
};

/// Projection step: solve z' = z~ + R dL on the post-step free value.
inline SpacingStep step_spacing(const ModelSpec& spec, const SpacingVector& z, double dt,
                                std::span<const double> xi, const SkorokhodOptions& sk = {}) {
  validate_spacing(z, spec.gaps());
  EngineOptions opts;
  opts.scheme = ReflectionScheme::projection;
  opts.skorokhod = sk;
  SpacingStepper stepper(spec, dt, opts);
  SpacingStep out{z, std::vector<double>(z.size())};
  stepper.advance(out.z.z, xi, out.dL);
  return out;
}

/// Bridge step: reflect the sampled in-step minimum; `bridge_uniforms` has one
/// uniform in (0,1) per spacing coordinate.
inline SpacingStep step_spacing_bridge(const ModelSpec& spec, const SpacingVector& z, double dt,
                                       std::span<const double> xi, std::span<const double> bridge_uniforms,
                                       const SkorokhodOptions& sk = {}) {
  validate_spacing(z, spec.gaps());
  detail::require(bridge_uniforms.size() == z.size(), Errc::invalid_input, "one bridge uniform per gap");
  EngineOptions opts;
  opts.scheme = ReflectionScheme::bridge;
  opts.skorokhod = sk;
  SpacingStepper stepper(spec, dt, opts);
  SpacingStep out{z, std::vector<double>(z.size())};
  stepper.advance(out.z.z, xi, [&](std::size_t j) { return bridge_uniforms[j]; }, out.dL);
  return out;
}

// ---------------------------------------------------------------------------
// Runs

struct Snapshot {
  double time = 0.0;
  SpacingVector z;
  double x1 = 0.0;
  std::vector<double> L;  // cumulative local times at this time
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  LocalTimeLedger local_times;  // at the final time

  std::vector<double> leading_position() const {
    std::vector<double> out;
    out.reserve(snapshots.size());
    for (const auto& s : snapshots) out.push_back(s.x1);
    return out;
  }
  const Snapshot& final() const { return snapshots.back(); }
};

namespace detail {

inline long long steps_for(double t, double dt) { return std::llround(t / dt); }

// Snapshot step indices: sorted, unique; defaults to {0, T}.
inline std::vector<long long> snapshot_steps(std::span<const double> times, double T, double dt) {
  std::vector<long long> steps;
  if (times.empty()) {
    steps = {0, steps_for(T, dt)};
  } else {
    for (double t : times) {
      require(std::isfinite(t) && t >= 0.0 && t <= T * (1.0 + 1e-12) + 1e-15, Errc::invalid_input,
              "snapshot times must lie in [0, T]");
      steps.push_back(steps_for(t, dt));
    }
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

}  // namespace detail

inline RunResult run(const ModelSpec& spec, const SpacingVector& init, double T, double dt,
                     const PathBundle& paths, std::span<const double> snapshot_times = {},
                     const EngineOptions& opts = {}) {
  spec.validate();
  validate_spacing(init, spec.gaps());
  detail::require(std::isfinite(T) && T >= 0.0, Errc::invalid_input, "horizon must be non-negative");
  detail::require(dt > 0.0 && std::isfinite(dt), Errc::invalid_step, "time step must be positive");

  const auto steps = detail::snapshot_steps(snapshot_times, T, dt);
  const long long total = detail::steps_for(T, dt);
  const std::size_t n = spec.gaps();
  SpacingStepper stepper(spec, dt, opts);

  SpacingVector z = init;
  double x1 = opts.x1;
  std::vector<double> L(n, 0.0), dL(n), xi(static_cast<std::size_t>(spec.m));
  RunResult result;
  result.snapshots.reserve(steps.size());
  std::size_t next = 0;
  auto record = [&](long long step) {
    while (next < steps.size() && steps[next] == step) {
      result.snapshots.push_back({static_cast<double>(step) * dt, z, x1, L});
      ++next;
    }
  };
  record(0);
  const std::uint64_t replica = opts.replica;
  for (long long step = 0; step < total; ++step) {
    const auto s = static_cast<std::uint64_t>(step);
    paths.fill_normals(replica, s, xi);
    x1 += stepper.advance(
        z.z, xi, [&](std::size_t j) { return paths.bridge_uniform(replica, static_cast<std::uint32_t>(j), s); },
        dL);
    for (std::size_t j : stepper.pushed()) L[j] += dL[j];
    record(step + 1);
  }
  result.local_times.L = std::move(L);
  return result;
}

/// Runs two initial spacings on the same increment stream.
inline std::pair<RunResult, RunResult> run_coupled(const ModelSpec& spec, const SpacingVector& init_lo,
                                                   const SpacingVector& init_hi, double T, double dt,
                                                   const PathBundle& paths,
                                                   std::span<const double> snapshot_times = {},
                                                   const EngineOptions& opts = {}) {
  validate_spacing(init_lo, spec.gaps());
  validate_spacing(init_hi, spec.gaps());
  for (std::size_t j = 0; j < init_lo.size(); ++j)
    detail::require(init_lo[j] <= init_hi[j], Errc::invalid_input, "coupled starts must be ordered");
  return {run(spec, init_lo, T, dt, paths, snapshot_times, opts),
          run(spec, init_hi, T, dt, paths, snapshot_times, opts)};
}

struct Ensemble {
  std::vector<SpacingVector> terminal;
  std::vector<double> x1;
};

/// Runs N replicas; replica r draws its initial spacing from sub-stream r and
/// its increments from replica index r. Results are ordered by replica.
/// `sampler(r, rng)` returns the initial spacing of replica r.
template <class Sampler>
std::vector<RunResult> run_ensemble(const ModelSpec& spec, Sampler&& sampler, std::size_t N, double T,
                                    double dt, std::uint64_t seed, std::span<const double> snapshot_times = {},
                                    EngineOptions opts = {}, unsigned threads = default_threads()) {
  detail::require(N >= 1, Errc::invalid_input, "need at least one replica");
  const PathBundle paths(seed, dt);
  std::vector<RunResult> out(N);
  parallel_for(N, threads, [&](std::size_t r) {
    StreamRng rng(seed, r);
    const SpacingVector init = sampler(static_cast<std::uint64_t>(r), rng);
    EngineOptions o = opts;
    o.replica = r;
    out[r] = run(spec, init, T, dt, paths, snapshot_times, o);
  });
  return out;
}

template <class Sampler>
Ensemble run_replicas(const ModelSpec& spec, Sampler&& sampler, std::size_t N, double T, double dt,
                      std::uint64_t seed, EngineOptions opts = {}, unsigned threads = default_threads()) {
  const double final_time[] = {T};
  auto runs = run_ensemble(spec, std::forward<Sampler>(sampler), N, T, dt, seed, final_time, opts, threads);
  Ensemble e;
  e.terminal.reserve(N);
  e.x1.reserve(N);
  for (auto& r : runs) {
    e.terminal.push_back(std::move(r.snapshots.back().z));
    e.x1.push_back(r.snapshots.back().x1);
  }
  return e;
}

/// Named-particle run; `observe(step, positions)` is called after every step
/// (and once with step 0 before the first) and may return false to stop early.
template <class Observer>
void run_named(const ModelSpec& spec, std::vector<double> y, long long steps, double dt, const PathBundle& paths,
               std::uint64_t replica, Observer&& observe) {
  NamedStepper stepper(spec);
  std::vector<double> xi(y.size());
  if (!observe(0LL, std::span<const double>(y))) return;
  for (long long step = 0; step < steps; ++step) {
    paths.fill_normals(replica, static_cast<std::uint64_t>(step), xi);
    stepper.advance(y, dt, xi);
    if (!observe(step + 1, std::span<const double>(y))) return;
  }
}

}  // namespace atlas
