#pragma once

// Rotation numbers: named irrationals, continued fractions, and decimal
// expansions, carried with enough precision for exact orbit arithmetic and
// convergent tables.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "detergo/torus.hpp"

namespace detergo {

class Irrational {
 public:
  /// "sqrt2", "golden", "pi_frac" (pi - 3), "e_frac" (e - 2).
  static Irrational named(const std::string& name);
  /// [a0; a1, a2, ...]. A finite list denotes the rational it evaluates to.
  static Irrational from_cf(std::vector<std::uint64_t> partial_quotients);
  /// Decimal expansion, trusted to `digits` significant fractional digits.
  static Irrational from_decimal(const std::string& text, int digits);

  [[nodiscard]] const std::string& label() const;
  /// frac(alpha), truncated to 2^-128.
  [[nodiscard]] TorusPoint fraction() const;
  [[nodiscard]] double value() const;
  /// a_0 .. a_{count-1}; throws ComputationError beyond the reliable depth.
  [[nodiscard]] std::vector<std::uint64_t> partial_quotients(std::size_t count) const;
  /// True when the partial quotients come from an exact rule or list.
  [[nodiscard]] bool exact_expansion() const;

  struct Impl;

 private:
  explicit Irrational(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;

  friend struct DiophantineAccess;
};

struct ConvergentRow {
  std::size_t m = 0;
  std::uint64_t a = 0;         ///< a_m
  std::string p;               ///< p_m (decimal)
  std::string q;               ///< q_m (decimal)
  double log_q = 0.0;
  double log_inv_distance = 0.0;  ///< log 1/||q_m alpha|| (NaN when unavailable)
};

struct DiophantineReport {
  std::vector<ConvergentRow> rows;
  double d_hat = 1.0;
  std::size_t window = 0;
  std::string convention;
};

/// d_hat = 1 + max over the last max(3, depth/10) convergents m of
/// log a_{m+1} / log q_m, the finite-depth proxy for
/// limsup log(1/||q_m alpha||) / log q_m. Golden ratio gives exactly 1.
DiophantineReport diophantine_type(const Irrational& alpha, std::size_t depth);

}  // namespace detergo
