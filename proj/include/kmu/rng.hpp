#pragma once

#include <cmath>
#include <cstdint>

namespace kmu::rng {

// SplitMix64 finalizer. Full-avalanche 64-bit mix, used to key streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/*
 * xoshiro256++ generator with per-stream seeding derived from a (seed, key)
 * pair via SplitMix64.  One Stream per Monte Carlo trial, keyed by the trial
 * index, makes every trial's draw sequence a pure function of (seed, trial):
 * aggregated results cannot depend on thread count or scheduling order.
 */
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t key) {
    std::uint64_t st = mix64(seed ^ mix64(key ^ 0x632BE59BD9B4E019ULL));
    for (auto& w : s_) {
      st += 0x9E3779B97F4A7C15ULL;
      w = mix64(st);
    }
    s_[0] |= 1;  // never all-zero
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on (0,1]; safe as a log() argument
  double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  // uniform on [0,1)
  double uniform_co() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // unit-rate exponential
  double exponential() { return -std::log(uniform()); }

  // standard normal, Marsaglia polar method with one cached value
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_co() - 1.0;
      v = 2.0 * uniform_co() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    has_cached_ = true;
    return u * f;
  }

  // Gamma(shape, scale) via Marsaglia-Tsang squeeze; shape < 1 boosted.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  // Poisson(mean): chop-down inversion for small means, Hormann's PTRS
  // transformed rejection otherwise.  Exact for all means.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
      const double p0 = std::exp(-mean);
      double p = p0, cum = p0;
      const double u = uniform();
      std::uint64_t k = 0;
      while (u > cum) {
        ++k;
        p *= mean / static_cast<double>(k);
        cum += p;
        if (k > 2000) break;  // u ~ 1 round-off guard
      }
      return k;
    }
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
      if (k < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
        return static_cast<std::uint64_t>(k);
      }
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace kmu::rng
