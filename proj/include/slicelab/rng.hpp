#pragma once

// Deterministic, stream-splittable random numbers.
//
// Every sampled object (point, direction, rotation, chain) draws from its own
// substream keyed by (seed, stream id).  Substreams are independent SplitMix64
// sequences, so results are bit-reproducible for a given (seed, count) no
// matter how work is partitioned across threads.  All variate transforms are
// spelled out here (Box-Muller, Marsaglia-Tsang, ...) instead of relying on
// std::*_distribution, whose output is implementation-defined.

#include <cstdint>
#include <cmath>

#include "slicelab/common.hpp"

namespace slicelab {

// SplitMix64 step (public-domain construction of Steele, Lea, Flood).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive 64-bit mixing; used to derive substream keys from a base
// seed plus arbitrary tag/index components.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
  std::uint64_t z = splitmix64(s);
  return z ^ b;
}

inline std::uint64_t hash_tag(const std::string& tag) {
  // FNV-1a; stable across platforms.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derive a substream seed from a base seed, a textual tag and an index.
inline std::uint64_t substream(std::uint64_t seed, const std::string& tag,
                               std::uint64_t index = 0) {
  return mix_seed(mix_seed(seed, hash_tag(tag)), index);
}

// One independent random stream.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : state_(mix_seed(seed, stream_id)) {
    // Warm up once so closely-related keys decorrelate immediately.
    (void)splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on (0,1); never returns an exact endpoint.
  double u01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * u01(); }

  // Standard normal via Box-Muller (pair cached).
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double r = std::sqrt(-2.0 * std::log(u01()));
    double t = 2.0 * pi * u01();
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

  double exponential() { return -std::log(u01()); }

  // Gamma(shape, 1).  Marsaglia-Tsang squeeze for shape >= 1, boosted
  // otherwise via Gamma(shape) = Gamma(shape+1) * U^{1/shape}.
  double gamma(double shape) {
    require(shape > 0.0, "gamma: shape must be positive");
    if (shape < 1.0) {
      double g = gamma(shape + 1.0);
      return g * std::pow(u01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = gaussian();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = u01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  Vec gaussian_vec(int n) {
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = gaussian();
    return g;
  }

  // Uniform on the unit sphere S^{n-1}.
  Vec unit_vec(int n) {
    for (;;) {
      Vec g = gaussian_vec(n);
      double norm = g.norm();
      if (norm > 1e-12) return g / norm;
    }
  }

 private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace slicelab
