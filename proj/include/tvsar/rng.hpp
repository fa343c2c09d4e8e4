#pragma once

#include <cstdint>
#include <random>

namespace tvsar {

// Pseudo-random stream with deterministic substream splitting. Every
// parallel unit (coefficient block, particle batch, replicate) gets its
// own stream derived from the run seed, so results do not depend on
// scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_(seed_mix(seed)), engine_(base_) {}

  // Derives an independent stream keyed by (a, b). Used once per
  // (iteration, block) pair; collisions are as unlikely as a 64-bit
  // hash collision.
  Rng split(std::uint64_t a, std::uint64_t b = 0) const {
    std::uint64_t x = base_;
    x = seed_mix(x ^ (0x9e3779b97f4a7c15ULL + a));
    x = seed_mix(x ^ (0xbf58476d1ce4e5b9ULL + b));
    return Rng(x, 0);
  }

  double uniform() { return unif_(engine_); }
  double normal() { return norm_(engine_); }
  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
  }
  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }
  double exponential() { return -std::log(1.0 - unif_(engine_)); }
  double chi2(double dof) { return 2.0 * gamma(0.5 * dof); }

  std::mt19937_64& engine() { return engine_; }

 private:
  Rng(std::uint64_t mixed, int) : base_(mixed), engine_(mixed) {}

  static std::uint64_t seed_mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t base_ = 0;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace tvsar
