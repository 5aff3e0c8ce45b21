#pragma once

// Counter-based random streams. Every variate is a pure function of
// (seed, replica, index, step), so runs are reproducible and independent of
// the order in which replicas or particles are evaluated.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>
#include <algorithm>

namespace atlas {

/// Philox4x32 with 10 rounds.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

namespace detail {

// Uniform on the open interval (0, 1) from 53 random bits.
inline double open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

inline Philox4x32::Key split_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Stream tags occupy the top two bits of counter word 2; the fallback
// stream also uses the top 16 bits of word 1 as a sub-counter.
inline constexpr std::uint32_t kNormalTag = 0x00000000u;
inline constexpr std::uint32_t kBridgeTag = 0x80000000u;
inline constexpr std::uint32_t kSequentialTag = 0x40000000u;
inline constexpr std::uint32_t kFallbackTag = 0xC0000000u;
inline constexpr std::uint32_t kIndexMask = 0x3FFFFFFFu;

}  // namespace detail

namespace detail {

// 256-layer ziggurat for the standard normal. Layer i spans [0, x[i]); x[0]
// is the virtual width of the base strip (which carries the tail beyond r).
struct ZigguratTables {
  static constexpr double r = 3.6541528853610088;
  static constexpr double v = 0.00492867323399;
  std::array<double, 257> x{};
  std::array<double, 257> f{};

  ZigguratTables() {
    auto pdf = [](double t) { return std::exp(-0.5 * t * t); };
    x[0] = v / pdf(r);
    x[1] = r;
    for (int i = 1; i < 256; ++i) {
      const double arg = v / x[i] + pdf(x[i]);
      x[i + 1] = arg >= 1.0 ? 0.0 : std::sqrt(-2.0 * std::log(arg));
    }
    x[256] = 0.0;
    for (int i = 0; i < 257; ++i) f[i] = pdf(x[i]);
  }

  static const ZigguratTables& get() {
    static const ZigguratTables tables;
    return tables;
  }
};

// Fast path: returns true and writes the variate when the 64 bits land
// strictly inside a layer rectangle (about 99% of draws).
inline bool ziggurat_fast(std::uint64_t bits, const ZigguratTables& t, double& out) {
  const unsigned layer = static_cast<unsigned>(bits & 0xFFu);
  const bool negative = (bits >> 8) & 1u;
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  const double x = u * t.x[layer];
  if (x < t.x[layer + 1]) {
    out = negative ? -x : x;
    return true;
  }
  return false;
}

}  // namespace detail

/// Shared Gaussian increments indexed by (replica, particle, step).
///
/// Particles 2p and 2p+1 share one Philox block, each taking 64 bits for a
/// ziggurat draw. Rejected draws (tail or wedge) continue from a fallback
/// sub-stream keyed by the same (replica, particle, step), so every variate
/// is still a pure function of its index. Steps must be below 2^48.
class PathBundle {
 public:
  PathBundle(std::uint64_t seed, double dt) : seed_(seed), key_(detail::split_seed(seed)), dt_(dt) {}

  std::uint64_t seed() const { return seed_; }
  double dt() const { return dt_; }

  double normal(std::uint64_t replica, std::uint32_t particle, std::uint64_t step) const {
    const auto out = Philox4x32::generate(counter(replica, particle >> 1, step, detail::kNormalTag), key_);
    const std::uint64_t bits = (particle & 1u) ? join(out[2], out[3]) : join(out[0], out[1]);
    return finish(bits, replica, particle, step);
  }

  /// Fills out[i] = normal(replica, i, step) for every i.
  void fill_normals(std::uint64_t replica, std::uint64_t step, std::span<double> out) const {
    const auto& t = detail::ZigguratTables::get();
    const std::size_t n = out.size();
    const std::size_t pairs = (n + 1) / 2;
    thread_local std::vector<std::uint64_t> bits;
    bits.resize(2 * pairs);
    philox_batch(replica, step, pairs, bits.data());
    for (std::size_t i = 0; i < n; ++i)
      if (!detail::ziggurat_fast(bits[i], t, out[i])) out[i] = slow(bits[i], replica, static_cast<std::uint32_t>(i), step);
  }

  /// Auxiliary uniform on (0,1) indexed by (replica, coordinate, step), used
  /// by the Brownian-bridge reflection scheme. Coordinates pair up in blocks
  /// the same way particles do for normals.
  double bridge_uniform(std::uint64_t replica, std::uint32_t coord, std::uint64_t step) const {
    const auto out = Philox4x32::generate(counter(replica, coord >> 1, step, detail::kBridgeTag), key_);
    return (coord & 1u) ? detail::open_unit(out[2], out[3]) : detail::open_unit(out[0], out[1]);
  }

  /// Fills out[j] = bridge_uniform(replica, j, step) for every j.
  void fill_bridge_uniforms(std::uint64_t replica, std::uint64_t step, std::span<double> out) const {
    const std::size_t n = out.size();
    const std::size_t pairs = (n + 1) / 2;
    thread_local std::vector<std::uint64_t> bits;
    bits.resize(2 * pairs);
    philox_batch(replica, step, pairs, bits.data(), detail::kBridgeTag);
    for (std::size_t j = 0; j < n; ++j)
      out[j] = (static_cast<double>(bits[j] >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static std::uint64_t join(std::uint32_t hi, std::uint32_t lo) { return (std::uint64_t{hi} << 32) | lo; }

  // Philox over consecutive pair indices, written as a structure-of-arrays
  // loop so the rounds vectorise. out[2p] and out[2p+1] match the two halves
  // of the block for pair p.
  void philox_batch(std::uint64_t replica, std::uint64_t step, std::size_t pairs, std::uint64_t* out,
                    std::uint32_t tag = detail::kNormalTag) const {
    constexpr std::size_t kLanes = 16;
    const auto base = counter(replica, 0, step, tag);
    for (std::size_t p0 = 0; p0 < pairs; p0 += kLanes) {
      const std::size_t lanes = std::min(kLanes, pairs - p0);
      std::uint32_t c0[kLanes], c1[kLanes], c2[kLanes], c3[kLanes];
      for (std::size_t l = 0; l < kLanes; ++l) {
        c0[l] = base[0];
        c1[l] = base[1];
        c2[l] = (static_cast<std::uint32_t>(p0 + l) & detail::kIndexMask) | tag;
        c3[l] = base[3];
      }
      std::uint32_t k0 = key_[0], k1 = key_[1];
      for (int round = 0; round < 10; ++round) {
        if (round > 0) {
          k0 += 0x9E3779B9u;
          k1 += 0xBB67AE85u;
        }
        for (std::size_t l = 0; l < kLanes; ++l) {
          const std::uint64_t a = std::uint64_t{0xD2511F53u} * c0[l];
          const std::uint64_t b = std::uint64_t{0xCD9E8D57u} * c2[l];
          const auto n0 = static_cast<std::uint32_t>(b >> 32) ^ c1[l] ^ k0;
          const auto n2 = static_cast<std::uint32_t>(a >> 32) ^ c3[l] ^ k1;
          c1[l] = static_cast<std::uint32_t>(b);
          c3[l] = static_cast<std::uint32_t>(a);
          c0[l] = n0;
          c2[l] = n2;
        }
      }
      for (std::size_t l = 0; l < lanes; ++l) {
        out[2 * (p0 + l)] = join(c0[l], c1[l]);
        out[2 * (p0 + l) + 1] = join(c2[l], c3[l]);
      }
    }
  }

  Philox4x32::Counter counter(std::uint64_t replica, std::uint32_t index, std::uint64_t step, std::uint32_t tag,
                              std::uint32_t sub = 0) const {
    return {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>((step >> 32) & 0xFFFFu) | (sub << 16),
            (index & detail::kIndexMask) | tag, static_cast<std::uint32_t>(replica)};
  }

  double finish(std::uint64_t bits, std::uint64_t replica, std::uint32_t particle, std::uint64_t step) const {
    double x;
    if (detail::ziggurat_fast(bits, detail::ZigguratTables::get(), x)) return x;
    return slow(bits, replica, particle, step);
  }

  // Tail and wedge handling; extra uniforms come from the fallback stream.
  double slow(std::uint64_t bits, std::uint64_t replica, std::uint32_t particle, std::uint64_t step) const {
    const auto& t = detail::ZigguratTables::get();
    std::uint32_t sub = 0;
    auto next_block = [&] {
      return Philox4x32::generate(counter(replica, particle, step, detail::kFallbackTag, ++sub), key_);
    };
    for (;;) {
      const unsigned layer = static_cast<unsigned>(bits & 0xFFu);
      const bool negative = (bits >> 8) & 1u;
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
      const double x = u * t.x[layer];
      if (x < t.x[layer + 1]) return negative ? -x : x;
      const auto blk = next_block();
      const double u1 = detail::open_unit(blk[0], blk[1]);
      const double u2 = detail::open_unit(blk[2], blk[3]);
      if (layer == 0) {
        // Tail beyond r (Marsaglia).
        const double a = -std::log(u1) / detail::ZigguratTables::r;
        const double b = -std::log(u2);
        if (2.0 * b > a * a) {
          const double y = detail::ZigguratTables::r + a;
          return negative ? -y : y;
        }
      } else {
        const double y = t.f[layer] + u1 * (t.f[layer + 1] - t.f[layer]);
        if (y < std::exp(-0.5 * x * x)) return negative ? -x : x;
      }
      const auto fresh = next_block();
      bits = join(fresh[0], fresh[1]);
    }
  }

  std::uint64_t seed_;
  Philox4x32::Key key_;
  double dt_;
};

/// Sequential generator over a private sub-stream (one per replica), used for
/// initial-condition sampling.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::split_seed(seed)), stream_(stream) {}

  double uniform() {
    if (have_ == 0) refill();
    const double u = (have_ == 2) ? detail::open_unit(block_[0], block_[1])
                                  : detail::open_unit(block_[2], block_[3]);
    --have_;
    return u;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  void refill() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(next_),
                                  static_cast<std::uint32_t>(next_ >> 32),
                                  detail::kSequentialTag | static_cast<std::uint32_t>(stream_ >> 32 & 0xFFFu),
                                  static_cast<std::uint32_t>(stream_)};
    block_ = Philox4x32::generate(ctr, key_);
    ++next_;
    have_ = 2;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t next_ = 0;
  Philox4x32::Counter block_{};
  int have_ = 0;
};

}  // namespace atlas
