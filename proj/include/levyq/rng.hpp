#ifndef LEVYQ_RNG_HPP
#define LEVYQ_RNG_HPP

/**
 * @file rng.hpp
 * @brief Deterministic random streams for reproducible Monte Carlo runs.
 *
 * Every replication owns a private stream derived from (seed, stream_id), so
 * worker threads never share mutable state and a given (seed, stream_id, cfg)
 * triple always reproduces the same path bit-for-bit.
 *
 * The engine is std::mt19937_64; the variate transforms (exponential via
 * inversion, normal via Box-Muller, gamma via Marsaglia-Tsang, Poisson via
 * Knuth's product method) are implemented here rather than through
 * std::*_distribution because the standard leaves distribution algorithms
 * implementation-defined, which would break the byte-identical-output
 * contract across standard libraries.
 */

#include <cmath>
#include <cstdint>
#include <random>

#include "levyq/errors.hpp"

namespace levyq {

/** One step of the SplitMix64 sequence; advances @p state and returns the output. */
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/**
 * A seeded random stream: (seed, stream_id) -> independent deterministic
 * sequence of variates. Copyable; copies continue independently.
 */
class rng_stream {
 public:
  rng_stream(std::uint64_t seed, std::uint64_t stream_id) {
    // Decorrelate nearby (seed, stream) pairs before seeding the engine.
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (stream_id + 1));
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  /** Uniform on the open interval (0,1); never returns 0 or 1. */
  double uniform() {
    for (;;) {
      const double u = (engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;  // u < 1 already holds: 53-bit mantissa / 2^53
    }
  }

  /** Exponential with the given rate (mean 1/rate). */
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /** Normal via Box-Muller (no cached spare, so the draw count is predictable). */
  double normal(double mean, double stddev) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  /**
   * Gamma(shape, rate) via Marsaglia-Tsang squeeze; shapes below 1 use the
   * boost Gamma(shape+1) * U^{1/shape}.
   */
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw input_error("rng_stream::gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(uniform(), 1.0 / shape);
      return gamma(shape + 1.0, rate) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal(0.0, 1.0);
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  /**
   * Poisson count by Knuth's product method. Intended for the small means
   * that arise from per-step jump counts (lambda * h); guarded against
   * accidental use with large means where the method degrades.
   */
  std::uint64_t poisson(double mean) {
    if (mean < 0.0) throw input_error("rng_stream::poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean > 64.0) throw input_error("rng_stream::poisson: mean too large for product method");
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace levyq

#endif  // LEVYQ_RNG_HPP
