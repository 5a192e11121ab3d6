#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace qsteady {

/// Seedable, portable 64-bit generator. Wraps std::mt19937_64 (whose output
/// sequence is fixed by the standard) and derives uniform and Gaussian
/// variates itself, so draws are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// Circularly-symmetric complex normal with E|z|^2 = 1.
  std::complex<double> complex_normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t x);
/// Deterministic seed for (master, a, b); independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace qsteady
