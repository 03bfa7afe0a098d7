#pragma once

// Internal: evaluation of P(x) = sum_k w_k e(v_k x) at single points and on
// equispaced grids (zero-padded FFT, blocked for large grids).

#include <cstdint>
#include <functional>
#include <span>

#include "detergo/torus.hpp"

namespace detergo::detail {

class TermPolynomial {
 public:
  /// `offsets` are nondecreasing and start at 0.
  TermPolynomial(std::span<const complex> weights, std::span<const std::uint64_t> offsets);

  [[nodiscard]] complex at(TorusPoint x) const;
  [[nodiscard]] std::size_t size() const { return weights_.size(); }
  [[nodiscard]] std::uint64_t degree() const { return offsets_.empty() ? 0 : offsets_.back(); }

 private:
  std::span<const complex> weights_;
  std::span<const std::uint64_t> offsets_;
  bool contiguous_ = false;
};

/// Largest FFT length held in memory at once.
inline constexpr std::uint64_t kMaxBlock = 1ULL << 22;

/// Calls visit(m, |P((m + offset) / grid)|) for every m in [0, grid). The
/// visiting order is fixed for a given (grid, offset).
void grid_magnitudes(std::span<const complex> weights, std::span<const std::uint64_t> offsets,
                     std::uint64_t grid, double offset,
                     const std::function<void(std::uint64_t, double)>& visit);

/// Grid point (m + offset) / grid as a torus point.
TorusPoint grid_point(std::uint64_t m, std::uint64_t grid, double offset);

}  // namespace detergo::detail
