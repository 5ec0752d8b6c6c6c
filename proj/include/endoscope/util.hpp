#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace endo {

using cd = std::complex<double>;

inline constexpr double two_pi = 6.283185307179586476925286766559;

inline double frac(double x) {
  double f = x - std::floor(x);
  return f >= 1.0 ? 0.0 : f;  // guard against rounding up to 1
}

// Deterministic RNG: mt19937_64 bits + explicit Box-Muller, so sequences do
// not depend on the standard library's distribution implementations.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}

  double unif() {  // (0, 1)
    const std::uint64_t bits = eng();
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }
  double gauss() {
    double u1 = unif(), u2 = unif();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }
  cd cgauss() {
    double u1 = unif(), u2 = unif();
    double r = std::sqrt(-std::log(u1));  // E|z|^2 = 1
    return {r * std::cos(two_pi * u2), r * std::sin(two_pi * u2)};
  }
  long below(long n) { return static_cast<long>(eng() % static_cast<std::uint64_t>(n)); }
};

}  // namespace endo
