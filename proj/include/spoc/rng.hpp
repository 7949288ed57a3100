#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace spoc::rng {

// std::mt19937_64 has a standard-mandated output sequence, so seeded runs are
// reproducible across standard libraries. The distributions below are written
// out explicitly for the same reason: std::*_distribution output is
// implementation-defined and would break byte-identical result files.
using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

/// Uniform double in [0, 1), 53 mantissa bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1]; safe to pass through log().
inline double uniform01_open(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal via Box-Muller. Consumes exactly two engine draws.
double normal(Engine& eng);

/// Gamma(alpha, 1) via Marsaglia-Tsang squeeze; alpha > 0.
double gamma(double alpha, Engine& eng);

/// Dirichlet(alpha) sample as a row vector summing to 1.
Eigen::VectorXd dirichlet(const Eigen::VectorXd& alpha, Engine& eng);

/// Per-trial seed derivation: trials are reproducible independently.
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial_index) {
  return base ^ trial_index;
}

/// splitmix64 step, used to derive decorrelated sub-seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace spoc::rng
