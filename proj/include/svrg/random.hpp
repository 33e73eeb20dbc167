#ifndef SVRG_RANDOM_HPP
#define SVRG_RANDOM_HPP

// Portable random variate primitives.
//
// Everything here is built directly on the raw 64-bit output of the engine so
// that a given seed yields the same stream on every standard library. The
// distributions in <random> are implementation-defined and are not used.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>

namespace svrg {

/// Default engine for every sampler in the library.
using Rng = std::mt19937_64;

template <class G>
concept Engine64 = std::uniform_random_bit_generator<G> &&
                   (G::min() == 0) &&
                   (G::max() == std::numeric_limits<std::uint64_t>::max());

/// Uniform on the open interval (0, 1).
template <Engine64 G>
inline double uniform01(G& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

template <Engine64 G>
inline double standard_exponential(G& rng) {
  return -std::log(uniform01(rng));
}

/// Marsaglia polar method. The second variate of each pair is discarded so
/// that the sampler stays stateless.
template <Engine64 G>
inline double standard_normal(G& rng) {
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

/// Gamma(shape, 1) by Marsaglia and Tsang; shape < 1 is boosted by U^{1/shape}.
template <Engine64 G>
inline double standard_gamma(double shape, G& rng) {
  if (shape < 1.0) {
    const double g = standard_gamma(shape + 1.0, rng);
    return g * std::exp(std::log(uniform01(rng)) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Gamma with shape/rate parameterisation: density ∝ x^{shape-1} e^{-rate x}.
template <Engine64 G>
inline double gamma_variate(double shape, double rate, G& rng) {
  return standard_gamma(shape, rng) / rate;
}

template <Engine64 G>
inline double normal_variate(double mean, double variance, G& rng) {
  return mean + std::sqrt(variance) * standard_normal(rng);
}

/// SplitMix64 finaliser, used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace svrg

#endif  // SVRG_RANDOM_HPP
