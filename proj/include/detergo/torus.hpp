#pragma once

// Points of the circle T = R/Z held as 128-bit fixed-point fractions, plus the
// compensated accumulator used by every sum in the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace detergo {

using uint128 = unsigned __int128;
using complex = std::complex<double>;

/// A point of R/Z stored as floor(x * 2^128). Addition and integer scaling
/// wrap modulo 1 exactly.
struct TorusPoint {
  uint128 bits = 0;

  static TorusPoint from_double(double x) {
    double frac = x - std::floor(x);
    if (frac >= 1.0) frac = 0.0;
    const double scaled_hi = std::ldexp(frac, 64);
    const double hi = std::floor(scaled_hi);
    const double rem = scaled_hi - hi;
    const auto lo = static_cast<std::uint64_t>(std::ldexp(rem, 64));
    return TorusPoint{(static_cast<uint128>(static_cast<std::uint64_t>(hi)) << 64) | lo};
  }

  /// Exact rational point num/den mod 1 (den > 0), rounded down to 2^-128.
  static TorusPoint from_ratio(std::int64_t num, std::int64_t den) {
    std::int64_t n = num % den;
    if (n < 0) n += den;
    // floor(n * 2^128 / den) via long division in two 64-bit limbs.
    const uint128 d = static_cast<uint128>(den);
    uint128 rem = static_cast<uint128>(n);
    uint128 hi = (rem << 64) / d;
    rem = (rem << 64) % d;
    uint128 lo = (rem << 64) / d;
    return TorusPoint{(hi << 64) | lo};
  }

  /// Value in [0, 1).
  [[nodiscard]] double value() const {
    return std::ldexp(static_cast<double>(static_cast<std::uint64_t>(bits >> 64)), -64);
  }

  /// Representative in [-1/2, 1/2), the better-conditioned input for sin/cos.
  [[nodiscard]] double centered() const {
    const auto top = static_cast<std::int64_t>(static_cast<std::uint64_t>(bits >> 64));
    const auto next = static_cast<std::uint64_t>(bits);
    return std::ldexp(static_cast<double>(top), -64) +
           std::ldexp(static_cast<double>(next), -128);
  }

  /// Distance to the nearest integer, ||x||.
  [[nodiscard]] double distance_to_integer() const { return std::abs(centered()); }

  friend TorusPoint operator+(TorusPoint a, TorusPoint b) { return {a.bits + b.bits}; }
  friend TorusPoint operator-(TorusPoint a, TorusPoint b) { return {a.bits - b.bits}; }
  friend TorusPoint operator*(TorusPoint a, std::uint64_t k) {
    return {a.bits * static_cast<uint128>(k)};
  }
  friend TorusPoint operator*(TorusPoint a, std::int64_t k) {
    // Sign extension yields k mod 2^128.
    return {a.bits * static_cast<uint128>(k)};
  }
  friend bool operator==(TorusPoint, TorusPoint) = default;
};

/// e(x) = exp(2 pi i x).
inline complex unit(TorusPoint x) {
  const double t = 2.0 * std::numbers::pi * x.centered();
  return {std::cos(t), std::sin(t)};
}

inline complex unit(double x) { return unit(TorusPoint::from_double(x)); }

/// Neumaier-compensated complex accumulator.
class CompensatedSum {
 public:
  void add(complex z) {
    add_part(re_, re_c_, z.real());
    add_part(im_, im_c_, z.imag());
  }
  [[nodiscard]] complex value() const { return {re_ + re_c_, im_ + im_c_}; }

 private:
  static void add_part(double& sum, double& comp, double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double re_ = 0, re_c_ = 0, im_ = 0, im_c_ = 0;
};

}  // namespace detergo
