#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace phasor {

// Deterministic splitmix64 stream. A single run seed derives independent
// per-component streams via derive("label"), so adding draws in one component
// never perturbs another.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0.
  int64_t uniform_int(int64_t n) {
    return int64_t(next_u64() % uint64_t(n));
  }

  // Standard normal via Box-Muller; second draw cached.
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Independent child stream; depends only on the original seed and label.
  Rng derive(std::string_view label) const {
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
    for (char c : label) {
      h ^= uint64_t(uint8_t(c));
      h *= 0x100000001b3ull;
    }
    Rng child(seed_ ^ h);
    child.next_u64();  // decorrelate nearby seeds
    child.seed_ = child.state_;
    return child;
  }

  Rng derive(std::string_view label, uint64_t index) const {
    Rng child = derive(label);
    child.state_ += 0x9e3779b97f4a7c15ull * index;
    child.seed_ = child.state_;
    return child;
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace phasor
