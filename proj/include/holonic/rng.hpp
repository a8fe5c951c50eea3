#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace holonic {

// Counter-less splitmix64 stream with deterministic child derivation.
//
// Every stochastic operation in the library takes a Stream by value; a
// stream is a pure function of (seed, derivation path), so adding a new
// diagnostic draw somewhere never perturbs draws made elsewhere. Child
// streams are derived by hashing a tag (purpose string, holon index,
// agent index, iteration) into the state.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  // Derive an independent stream for a named purpose.
  [[nodiscard]] Stream child(std::string_view tag) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag bytes
    for (char c : tag) {
      h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
      h *= 0x100000001b3ULL;
    }
    return Stream(mix(state_ ^ h));
  }

  // Derive an independent stream for an index (holon, agent, t, ...).
  [[nodiscard]] Stream child(std::uint64_t index) const {
    return Stream(mix(state_ ^ (0x9e3779b97f4a7c15ULL + index)));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (used by the gamma sampler).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Marsaglia-Tsang gamma sampler, shape > 0, unit scale.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace holonic
