#pragma once

// Weighted exponential sums sum_k theta(k) e(x u_k), their sup-norm over the
// torus, and the fitted growth exponents.
//
// Since every u_k is an integer the sup over real x is a sup over [0, 1).
// The sup is estimated on an equispaced grid evaluated by zero-padded FFT and
// refined locally; the grid maximum plus a derivative bound gives a rigorous
// upper bound, so every report carries a certified [lower, upper] bracket.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "detergo/seqcore.hpp"
#include "detergo/torus.hpp"

namespace detergo {

complex weighted_exp_sum(const WeightSequence& theta, const IndexSequence& u, std::uint64_t n,
                         TorusPoint x);
complex weighted_exp_sum(const WeightSequence& theta, const IndexSequence& u, std::uint64_t n,
                         double x);
/// Sum over k in [begin, end).
complex weighted_exp_sum_range(const WeightSequence& theta, const IndexSequence& u,
                               std::uint64_t begin, std::uint64_t end, TorusPoint x);

/// A_n(x) = sum_{j<q} theta(j q^n) e(j q^n x).
complex block_factor(const QMultSeq& seq, std::size_t level, TorusPoint x);
/// V_{q^level}(x) as the product of the block factors A_0 ... A_{level-1}.
complex qmult_block_sum(const QMultSeq& seq, std::size_t level, TorusPoint x);
complex qmult_block_sum(const QMultSeq& seq, std::size_t level, double x);

enum class SupMode { fast, certified };
std::string to_string(SupMode mode);

struct SupOptions {
  SupMode mode = SupMode::fast;
  double tolerance = 1e-3;             ///< certified mode: max upper - lower
  std::uint64_t max_grid = 1ULL << 26;
  std::size_t refine_cells = 16;
  double grid_offset = 0.0;            ///< grid points are (m + offset) / M
};

struct SupReport {
  std::uint64_t n = 0;                 ///< number of terms
  double lower = 0.0;                  ///< attained value of |sum| (grid or refined)
  double upper = 0.0;                  ///< grid maximum + off-grid slack
  double slack = 0.0;                  ///< derivative-bound slack of the grid
  double argmax = 0.0;                 ///< x attaining `lower`
  std::uint64_t grid_size = 0;
  SupMode mode = SupMode::fast;
  bool certified = false;              ///< slack <= tolerance was reached
  std::string note;
};

SupReport sup_norm(const WeightSequence& theta, const IndexSequence& u, std::uint64_t n,
                   const SupOptions& options = {});
/// Sup over x of |sum_{k in [begin, end)} theta(k) e(x u_k)|.
SupReport sup_norm_range(const WeightSequence& theta, const IndexSequence& u,
                         std::uint64_t begin, std::uint64_t end, const SupOptions& options = {});
/// Core routine over explicit terms; indices must be nondecreasing.
SupReport sup_of_terms(std::span<const complex> weights, std::span<const std::uint64_t> indices,
                       const SupOptions& options = {});

struct DeltaFit {
  std::vector<SupReport> points;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};
/// Least-squares slope of log sup against log N over a dyadic N list
/// (at least five entries).
DeltaFit delta_fit(const WeightSequence& theta, const IndexSequence& u,
                   std::span<const std::uint64_t> ns, const SupOptions& options = {});

struct WindowRow {
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  double sup = 0.0;
  double raw_exponent = 0.0;  ///< log sup / log(n - m)
  double exponent = 0.0;      ///< log(sup / n^epsilon) / log(n - m)
};
struct WindowReport {
  std::vector<WindowRow> rows;
  double epsilon = 0.01;
  double max_exponent = 0.0;
  double max_raw_exponent = 0.0;
};
/// Windows are inclusive: terms k = m..n, with n - m >= 16.
WindowReport window_exponent(const WeightSequence& theta, const IndexSequence& u,
                             std::span<const std::pair<std::uint64_t, std::uint64_t>> windows,
                             double epsilon = 0.01);

struct ShiftedSumResult {
  bool pass = true;
  double worst_margin = 0.0;  ///< min over samples of rhs - lhs
  double witness_x = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  int t = 0;
};
/// Checks |sum_{n<N} theta(n+p) e((n+p)x)| <= 2 q^t + (N / q^t) |V_{q^t}(x)| at
/// `samples` points x drawn from the counter stream `seed`.
ShiftedSumResult shifted_sum_check(const QMultSeq& seq, std::uint64_t n, std::uint64_t p, int t,
                                   std::size_t samples, std::uint64_t seed = 0);

}  // namespace detergo
